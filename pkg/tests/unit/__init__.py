"""
Unit tests for pvgae.

Unit tests are fast, isolated, and have no external dependencies.
Run with: pytest tests/unit/ -m unit
"""
