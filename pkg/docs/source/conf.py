"""
Sphinx build settings for the pvgae documentation.

API pages are generated from the package docstrings, which use reST field
lists (``:param:``, ``:raises:``). Type hints are rendered in the parameter
descriptions instead of the signatures.
"""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))

from pvgae import __version__  # noqa: E402

project = "pvgae-toolkit"
copyright = "2026, pvgae contributors"
author = "pvgae contributors"
version = ".".join(__version__.split(".")[:2])
release = __version__

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx_autodoc_typehints",
    "sphinx_copybutton",
    "sphinx_rtd_theme",
]

autosummary_generate = True
autodoc_member_order = "bysource"
autodoc_default_options = {
    "members": True,
    "undoc-members": False,
    "show-inheritance": True,
}
typehints_document_rtype = True

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "sklearn": ("https://scikit-learn.org/stable/", None),
}

copybutton_prompt_text = r"\$ "
copybutton_prompt_is_regexp = True

templates_path = ["_templates"]
exclude_patterns: list[str] = ["_build"]

html_theme = "sphinx_rtd_theme"
html_title = f"pvgae {release}"
html_theme_options = {"navigation_depth": 3}
