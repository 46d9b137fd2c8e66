"""
Integration tests for pvgae.

Integration tests train real models end to end and may take a while.
Run with: pytest tests/integration/ -m integration
"""
