"""Computation graph bookkeeping and gradient-recording mode.

Graphs and the recording flag are thread-local: a graph and the tensors
recorded into it belong to the thread that built them.
"""
import itertools
import threading
from contextlib import contextmanager
from typing import Iterator, List

_local = threading.local()
_sequence = itertools.count()


class Graph:
    """Append-only record of the operations performed inside a scope.

    Entering a graph makes it the active recording target for the current
    thread; leaving it releases every recorded node, which frees the saved
    values and detaches the intermediate tensors. One graph per training
    iteration bounds memory.
    """

    def __init__(self, retain: bool = True):
        """
        Args:
            retain: Keep node records (False for the implicit default graph,
                which only hands out node references)
        """
        self.retain = retain
        self.nodes: List = []
        self._size = 0

    def record(self, node) -> int:
        """Append a node and return its reference inside this graph."""
        ref = self._size
        self._size += 1
        if self.retain:
            self.nodes.append(node)
        return ref

    def __len__(self) -> int:
        return self._size

    def release(self) -> None:
        """Drop every recorded node and the values saved for backward."""
        for node in self.nodes:
            node.release()
        self.nodes.clear()

    def __enter__(self) -> "Graph":
        _stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        _stack().pop()
        self.release()
        return False


def _stack() -> List[Graph]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def current_graph() -> Graph:
    """Graph that receives new nodes on this thread."""
    stack = _stack()
    if stack:
        return stack[-1]
    default = getattr(_local, "default", None)
    if default is None:
        default = Graph(retain=False)
        _local.default = default
    return default


def next_sequence() -> int:
    """Global creation order; inputs always precede their consumers."""
    return next(_sequence)


def is_grad_enabled() -> bool:
    return getattr(_local, "grad_enabled", True)


@contextmanager
def set_grad_enabled(mode: bool) -> Iterator[None]:
    previous = is_grad_enabled()
    _local.grad_enabled = bool(mode)
    try:
        yield
    finally:
        _local.grad_enabled = previous


@contextmanager
def no_grad() -> Iterator[None]:
    """Evaluate without recording anything."""
    with set_grad_enabled(False):
        yield
