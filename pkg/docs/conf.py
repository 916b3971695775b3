# -*- coding: utf-8 -*-
#
# spanbreaker documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os

# document the source tree rather than an installed copy
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.todo',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'spanbreaker'
copyright = u'2026, spanbreaker contributors'

version = '0.1'
release = '0.1.0'

exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_theme_options = {
    'page_width': '1080px',
    'fixed_sidebar': 'true',
}
html_static_path = []
htmlhelp_basename = 'spanbreakerdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}
latex_documents = [
  ('index', 'spanbreaker.tex', u'spanbreaker Documentation',
   u'spanbreaker contributors', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    ('index', 'spanbreaker', u'spanbreaker Documentation',
     [u'spanbreaker contributors'], 1)
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'pandas': ('https://pandas.pydata.org/docs/', None),
    'pytest': ('https://docs.pytest.org/en/stable/', None),
}
