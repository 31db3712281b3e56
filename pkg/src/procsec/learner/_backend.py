"""Select the split-search kernel: compiled extension if built, numpy otherwise."""
from . import _split_py

try:
    from ._split import best_split as _compiled_best_split
except ImportError:  # extension not built
    _compiled_best_split = None

python_best_split = _split_py.best_split
compiled_best_split = _compiled_best_split

if _compiled_best_split is not None:
    BACKEND = "cython"
    best_split = _compiled_best_split
else:
    BACKEND = "python"
    best_split = python_best_split


def use(name: str) -> None:
    """Force a backend (``"cython"`` or ``"python"``) for this process."""
    global BACKEND, best_split
    if name == "python":
        BACKEND, best_split = "python", python_best_split
    elif name == "cython":
        if compiled_best_split is None:
            raise RuntimeError("compiled kernel is not built")
        BACKEND, best_split = "cython", compiled_best_split
    else:
        raise ValueError(f"unknown backend {name!r}")
