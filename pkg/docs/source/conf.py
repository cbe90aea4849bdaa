# -*- coding: utf-8 -*-

"""Configuration for the Sphinx documentation builder."""
import os
import re
import sys


def load_version(filepath_init):
    """Load version from variable __version__ in file __init__.py"""
    try:
        with open(filepath_init) as file_handle:
            file_content = file_handle.read()
        re_for_version = re.compile(r'''__version__\s+=\s+['"](.*)['"]''')
        return re_for_version.search(file_content).group(1)
    except Exception:
        message = (
            'Failed to load version string from __version__ variable in '
            '__init__.py in the package directory.')
        raise ValueError(message)



# -- Project information -----------------------------------------------------

project = 'rbmwave'
copyright = '2026, rbmwave developers'
author = 'rbmwave developers'

# The short X.Y version
version = ''
# The full version, including alpha/beta/rc tags
release = load_version(os.path.join('..', '..', 'rbmwave', '__init__.py'))



# -- General configuration ---------------------------------------------------

# Minimal Sphinx version for build
needs_sphinx = '1.7.4'

# Sphinx extension module names, see https://www.sphinx-doc.org/en/master/usage/extensions
extensions = [
    'sphinx.ext.autodoc',      # auto-generate documentation from docstrings
    'sphinx.ext.viewcode',     # links to highlighted source code for documented code objects
    'sphinx.ext.napoleon',     # support for Google and NumPy docstrings
    'sphinx.ext.autosummary',  # function/method/attribute summary lists
    'sphinx.ext.intersphinx',  # link to objects in external documentation
    'sphinx.ext.mathjax',      # formulas in the model description
]

# Sphinx configuration
# - http://www.sphinx-doc.org/en/master/usage/configuration.html
add_module_names = False

# Relative path to package
sys.path.insert(0, os.path.abspath('../..'))

# The suffix(es) of source filenames.
source_suffix = '.rst'

# The master toctree document.
master_doc = 'index'

# List of patterns, relative to source directory, that match files and
# directories to ignore when looking for source files.
exclude_patterns = []

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'



# -- Options for HTML output -------------------------------------------------

# Read the Docs (RTD) Sphinx Theme
# - https://sphinx-rtd-theme.readthedocs.io/en/latest
html_theme = 'sphinx_rtd_theme'
html_theme_options = {
    'titles_only': False,
}



# -- Extension configuration -------------------------------------------------

# intersphinx
intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'networkx': ('https://networkx.org/documentation/stable/', None),
}

# autodoc
autodoc_member_order = 'bysource'

# napoleon
napoleon_use_param = False
napoleon_use_rtype = False
napoleon_numpy_docstring = True
napoleon_google_docstring = False
napoleon_use_ivar = True

# autosummary
autosummary_generate = True
