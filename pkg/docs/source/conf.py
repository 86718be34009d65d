# -*- coding: utf-8 -*-
#
# Virtual Mirror SNA documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys
import datetime as dt

sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.todo',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'Virtual Mirror SNA'
copyright = u'{}, the Virtual Mirror SNA developers'.format(dt.date.today().year)

# The short X.Y version.
version = '2026.10.0'
# The full version, including alpha/beta/rc tags.
release = '2026.10.0'

language = 'en'
exclude_patterns = []
pygments_style = 'sphinx'
autodoc_member_order = 'bysource'

# -- Options for HTML output ----------------------------------------------

on_rtd = os.environ.get('READTHEDOCS', None) == 'True'

if not on_rtd:  # only import and set the theme if we're building docs locally
    import sphinx_rtd_theme
    html_theme = 'sphinx_rtd_theme'
    html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

htmlhelp_basename = 'VirtualMirrorSNAdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
    ('index', 'VirtualMirrorSNA.tex', u'Virtual Mirror SNA Documentation',
     u'Virtual Mirror SNA developers', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    ('index', 'virtualmirror', u'Virtual Mirror SNA Documentation',
     [u'Virtual Mirror SNA developers'], 1)
]
