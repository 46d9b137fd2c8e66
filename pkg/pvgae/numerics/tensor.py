"""
Dense tensors with reverse-mode automatic differentiation.

Every ``Tensor`` wraps a 64-bit numpy array. Operations are small
``Function`` subclasses with a ``forward`` on raw arrays and a ``backward``
returning one gradient per input. When any input requires gradients the
result keeps a reference to the function context that produced it, which
links the computation into a graph. ``GradientTape`` flattens that graph
into topological order and runs the backward pass.

Forward results are checked for finiteness: a NaN or infinity is an error
state, never a value.
"""

from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from pvgae.utils.errors import ContractError, DimensionError, NumericError

# Floor for every probability that reaches a logarithm.
PROB_EPS = 1e-7
# exp() inputs are clipped to this magnitude.
EXP_CLIP = 80.0

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence]


class Tensor:
    """
    A dense float64 array that can take part in gradient computation.

    :param data: Array-like contents; always copied into a new float64 array.
    :param requires_grad: Whether gradients should be tracked for this tensor.
    """

    __array_priority__ = 1000

    def __init__(self, data: ArrayLike, requires_grad: bool = False):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._ctx: Optional["Function"] = None

    @classmethod
    def _from_op(cls, data: np.ndarray, ctx: Optional["Function"]) -> "Tensor":
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = ctx is not None
        out.grad = None
        out._ctx = ctx
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def is_leaf(self) -> bool:
        return self._ctx is None

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {list(self.shape)}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        """Return a constant copy that is cut off from the gradient graph."""
        return Tensor(self.data)

    def __repr__(self) -> str:
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={list(self.shape)}{grad})"

    # Arithmetic -------------------------------------------------------

    def __add__(self, other: ArrayLike) -> "Tensor":
        return Add.apply(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return Add.apply(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return Sub.apply(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return Sub.apply(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return Mul.apply(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return Mul.apply(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return Div.apply(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return Div.apply(other, self)

    def __neg__(self) -> "Tensor":
        return Neg.apply(self)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return MatMul.apply(self, other)

    def __rmatmul__(self, other: ArrayLike) -> "Tensor":
        return MatMul.apply(other, self)

    def __pow__(self, exponent: float) -> "Tensor":
        return Pow.apply(self, exponent=float(exponent))

    @property
    def T(self) -> "Tensor":
        return Transpose.apply(self)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return Sum.apply(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.data.shape[axis]
        return Sum.apply(self, axis=axis, keepdims=keepdims) / float(count)

    def square(self) -> "Tensor":
        return Pow.apply(self, exponent=2.0)

    def exp(self) -> "Tensor":
        return Exp.apply(self)

    def log(self) -> "Tensor":
        return Log.apply(self)

    def sigmoid(self) -> "Tensor":
        return Sigmoid.apply(self)

    def relu(self) -> "Tensor":
        return ReLU.apply(self)

    def clamp(self, low: float = -np.inf, high: float = np.inf) -> "Tensor":
        return Clamp.apply(self, low=low, high=high)

    def log_softmax(self, axis: int = -1) -> "Tensor":
        return LogSoftmax.apply(self, axis=axis)

    def backward(self) -> None:
        """
        Backpropagate from this scalar and store gradients on leaf tensors.

        Leaves that require gradients receive ``.grad``; intermediate nodes
        are left untouched.
        """
        tape = GradientTape(self)
        grads = tape.run()
        for node in tape.nodes:
            if node.is_leaf and node.requires_grad:
                node.grad = grads.get(id(node), np.zeros_like(node.data))


def as_tensor(value: ArrayLike) -> Tensor:
    """Wrap ``value`` as a constant tensor unless it already is one."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Function:
    """
    Base class for differentiable operations.

    Subclasses implement ``forward`` on numpy arrays and ``backward``
    returning a tuple with one gradient (or None) per input tensor.
    """

    def __init__(self, *parents: Tensor):
        self.parents = parents
        self.saved: Tuple = ()

    def save_for_backward(self, *values) -> None:
        self.saved = values

    def forward(self, *arrays: np.ndarray, **kwargs) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: ArrayLike, **kwargs) -> Tensor:
        tensors = tuple(as_tensor(x) for x in inputs)
        ctx = cls(*tensors)
        out = np.asarray(ctx.forward(*(t.data for t in tensors), **kwargs), dtype=np.float64)
        if not np.all(np.isfinite(out)):
            raise NumericError(f"{cls.__name__} produced non-finite values")
        tracked = any(t.requires_grad for t in tensors)
        return Tensor._from_op(out, ctx if tracked else None)


class Add(Function):
    def forward(self, a, b):
        self.save_for_backward(a.shape, b.shape)
        return a + b

    def backward(self, grad):
        a_shape, b_shape = self.saved
        return _unbroadcast(grad, a_shape), _unbroadcast(grad, b_shape)


class Sub(Function):
    def forward(self, a, b):
        self.save_for_backward(a.shape, b.shape)
        return a - b

    def backward(self, grad):
        a_shape, b_shape = self.saved
        return _unbroadcast(grad, a_shape), _unbroadcast(-grad, b_shape)


class Mul(Function):
    def forward(self, a, b):
        self.save_for_backward(a, b)
        return a * b

    def backward(self, grad):
        a, b = self.saved
        return _unbroadcast(grad * b, a.shape), _unbroadcast(grad * a, b.shape)


class Div(Function):
    def forward(self, a, b):
        self.save_for_backward(a, b)
        return a / b

    def backward(self, grad):
        a, b = self.saved
        return _unbroadcast(grad / b, a.shape), _unbroadcast(-grad * a / (b * b), b.shape)


class Neg(Function):
    def forward(self, a):
        return -a

    def backward(self, grad):
        return (-grad,)


class MatMul(Function):
    def forward(self, a, b):
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DimensionError("matmul", a.shape, b.shape)
        self.save_for_backward(a, b)
        return a @ b

    def backward(self, grad):
        a, b = self.saved
        return grad @ b.T, a.T @ grad


class Transpose(Function):
    def forward(self, a):
        if a.ndim != 2:
            raise DimensionError("transpose", a.shape)
        return a.T.copy()

    def backward(self, grad):
        return (grad.T,)


class Sum(Function):
    def forward(self, a, axis=None, keepdims=False):
        self.save_for_backward(a.shape, axis, keepdims)
        return np.sum(a, axis=axis, keepdims=keepdims)

    def backward(self, grad):
        shape, axis, keepdims = self.saved
        if axis is not None and not keepdims:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, shape).copy(),)


class Pow(Function):
    def forward(self, a, exponent=2.0):
        self.save_for_backward(a, exponent)
        return np.power(a, exponent)

    def backward(self, grad):
        a, exponent = self.saved
        return (grad * exponent * np.power(a, exponent - 1.0),)


class Exp(Function):
    def forward(self, a):
        out = np.exp(np.clip(a, -EXP_CLIP, EXP_CLIP))
        self.save_for_backward(a, out)
        return out

    def backward(self, grad):
        a, out = self.saved
        inside = np.abs(a) <= EXP_CLIP
        return (grad * out * inside,)


class Log(Function):
    def forward(self, a):
        self.save_for_backward(a)
        return np.log(np.maximum(a, PROB_EPS))

    def backward(self, grad):
        (a,) = self.saved
        above = a > PROB_EPS
        return (np.where(above, grad / np.maximum(a, PROB_EPS), 0.0),)


class Sigmoid(Function):
    def forward(self, a):
        out = expit(a)
        self.save_for_backward(out)
        return out

    def backward(self, grad):
        (out,) = self.saved
        return (grad * out * (1.0 - out),)


class ReLU(Function):
    def forward(self, a):
        self.save_for_backward(a)
        return np.maximum(a, 0.0)

    def backward(self, grad):
        (a,) = self.saved
        return (grad * (a > 0.0),)


class Clamp(Function):
    def forward(self, a, low=-np.inf, high=np.inf):
        self.save_for_backward(a, low, high)
        return np.clip(a, low, high)

    def backward(self, grad):
        a, low, high = self.saved
        return (grad * ((a >= low) & (a <= high)),)


class LogSoftmax(Function):
    def forward(self, a, axis=-1):
        shifted = a - np.max(a, axis=axis, keepdims=True)
        out = shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
        self.save_for_backward(out, axis)
        return out

    def backward(self, grad):
        out, axis = self.saved
        return (grad - np.exp(out) * np.sum(grad, axis=axis, keepdims=True),)


# Functional API ------------------------------------------------------

def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """
    Matrix product of two 2-D tensors.

    :raises DimensionError: If ``a`` is [m, k] and ``b`` is not [k, n].
    """
    return MatMul.apply(a, b)


def transpose(a: ArrayLike) -> Tensor:
    return Transpose.apply(a)


def exp(a: ArrayLike) -> Tensor:
    return Exp.apply(a)


def log(a: ArrayLike) -> Tensor:
    return Log.apply(a)


def sigmoid(a: ArrayLike) -> Tensor:
    return Sigmoid.apply(a)


def relu(a: ArrayLike) -> Tensor:
    return ReLU.apply(a)


def clamp(a: ArrayLike, low: float = -np.inf, high: float = np.inf) -> Tensor:
    return Clamp.apply(a, low=low, high=high)


def log_softmax(a: ArrayLike, axis: int = -1) -> Tensor:
    return LogSoftmax.apply(a, axis=axis)


class GradientTape:
    """
    Topologically ordered record of the operations leading to a root tensor.

    ``nodes`` lists every tensor that requires gradients and is reachable
    from the root, parents before children. ``run`` walks the list in
    reverse, accumulating one gradient per node; a node reached along
    several paths receives the sum of all path gradients.
    """

    def __init__(self, root: Tensor):
        self.root = root
        self.nodes: List[Tensor] = self._order(root)

    @staticmethod
    def _order(root: Tensor) -> List[Tensor]:
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited or not node.requires_grad:
                continue
            visited.add(id(node))
            stack.append((node, True))
            if node._ctx is not None:
                for parent in node._ctx.parents:
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))
        return order

    def run(self) -> Dict[int, np.ndarray]:
        """
        Execute the backward pass.

        :return: Mapping from ``id(tensor)`` to its accumulated gradient.
        """
        grads: Dict[int, np.ndarray] = {id(self.root): np.ones_like(self.root.data)}
        for node in reversed(self.nodes):
            grad = grads.get(id(node))
            if grad is None or node._ctx is None:
                continue
            for parent, parent_grad in zip(node._ctx.parents, node._ctx.backward(grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + parent_grad
                else:
                    grads[key] = np.array(parent_grad, dtype=np.float64)
        return grads


def backward(loss: Tensor,
             params: Union[Mapping[str, Tensor], Iterable[Tensor]]
             ) -> Union[Dict[str, np.ndarray], List[np.ndarray]]:
    """
    Gradients of a scalar loss with respect to the given parameters.

    Parameters that the loss does not depend on get a zero gradient.

    :param loss: Scalar tensor produced by tracked operations.
    :param params: Either a name → tensor mapping or a sequence of tensors.
    :return: Gradients in the same container type as ``params``.
    :raises ContractError: If ``loss`` is not a scalar.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {list(loss.shape)}")
    grads = GradientTape(loss).run() if loss.requires_grad else {}

    def lookup(tensor: Tensor) -> np.ndarray:
        found = grads.get(id(tensor))
        return found.reshape(tensor.shape) if found is not None else np.zeros_like(tensor.data)

    if isinstance(params, Mapping):
        return {name: lookup(t) for name, t in params.items()}
    return [lookup(t) for t in params]
