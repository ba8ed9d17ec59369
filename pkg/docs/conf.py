# Sphinx configuration of the py4mammo documentation.
import pathlib

project = "py4mammo"
copyright = "2024, py4mammo developers"
author = "py4mammo developers"


def _version_from_manifest():
    manifest = pathlib.Path(__file__).parent.parent / "pyproject.toml"
    for line in manifest.read_text(encoding="utf-8").splitlines():
        key, _, value = line.partition("=")
        if key.strip() == "version":
            return value.strip().strip('"')


release = _version_from_manifest()

extensions = [
    "sphinx.ext.autosummary",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
    "sphinx_automodapi.automodapi",
]
automodapi_inheritance_diagram = False
autosummary_ignore_module_all = False
napoleon_numpy_docstring = True
napoleon_google_docstring = False
# attribute docstrings of the frozen dataclasses
napoleon_attr_annotations = True

templates_path = ["_templates"]
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

html_theme = "basic"
html_show_sphinx = False
html_show_copyright = False
html_domain_indices = False
html_use_index = False
modindex_common_prefix = ["py4mammo."]

from docutils import nodes


def key_role(name, rawtext, text, lineno, inliner, options=None, content=None):
    "Render a key of the case file, e.g., :key:`fthrx`."
    node = nodes.literal(rawtext, text, classes=["case-key"])
    return [node], []


def setup(app):
    app.add_role("key", key_role)
