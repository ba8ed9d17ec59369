# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
import importlib
import logging

from py4mammo import exception

logger = logging.getLogger(__name__)


class _MissingModule:
    def __init__(self, name, feature):
        self._name = name
        self._feature = feature

    def __getattr__(self, attr):
        raise exception.ModuleNotInstalled(
            f"{self._feature.capitalize()} requires the package '{self._name}', which "
            "is not part of py4mammo-core. Please install it or the full py4mammo "
            "package to use this functionality."
        )


def optional(name, feature="this part of py4mammo"):
    """Import an optional dependency.

    If the import fails, the returned object raises :class:`ModuleNotInstalled` as soon
    as any attribute is accessed, naming the *feature* that needs the package."""
    try:
        return importlib.import_module(name)
    except ImportError:
        logger.debug("Optional package %s is not available.", name)
        return _MissingModule(name, feature)


def is_imported(module):
    return not isinstance(module, _MissingModule)


def require(module):
    "Raise :class:`ModuleNotInstalled` unless *module* was imported successfully."
    if not is_imported(module):
        module.__version__
