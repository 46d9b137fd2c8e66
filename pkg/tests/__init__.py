"""
pvgae test suite.

Tests are organized as:
- unit/: Fast unit tests with no external dependencies
- integration/: End-to-end pipeline, CLI and sweep runs; desk-scale acceptance runs behind --runslow
"""
