"""Python surface of the kacsim event-driven Kac-system simulator."""

try:
    from ._kacsim import *  # packaged wheel layout
except ImportError:  # in-tree build: module next to the package on sys.path
    from _kacsim import *  # noqa: F401,F403
