import os
import sys
sys.path.insert(0, os.path.abspath('../../src'))

project = 'dksel'
copyright = '2026, dksel developers'
author = 'dksel developers'
release = '0.1.0'

extensions = [
    'sphinx_rtd_theme',
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.napoleon',
]
autodoc_member_order = 'bysource'
napoleon_google_docstring = True
napoleon_numpy_docstring = False

exclude_patterns = []

html_theme = 'sphinx_rtd_theme'
