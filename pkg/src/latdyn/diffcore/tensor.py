"""Reverse-mode autodiff over numpy arrays.

A fixed set of operations sufficient for the networks in ``latdyn.model``:
elementwise arithmetic, matmul, strided (transposed) convolution, softmax,
layer norm, reductions, indexing/reshape, trig, sigmoid and a fused
scaled-dot-product attention. First-order gradients only.
"""

import numpy as np

from ..kernels import col2im, im2col


def _unbroadcast(grad, shape):
    """Reduce a broadcast gradient back to ``shape``."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """Node in a dynamically built computation graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data)
        if self.data.dtype not in (np.float32, np.float64):
            self.data = self.data.astype(np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}, grad={self.requires_grad})"

    # -- graph plumbing ----------------------------------------------------

    @staticmethod
    def _make(data, parents, backward):
        out = Tensor(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward = backward
        return out

    def _accum(self, grad):
        grad = np.asarray(grad, dtype=self.data.dtype)
        if self.grad is None:
            self.grad = grad.copy() if grad.base is not None else grad
        else:
            self.grad = self.grad + grad

    def backward(self):
        """Reverse accumulation from a scalar output."""
        if self.data.size != 1:
            raise ValueError(f"backward() requires a scalar output, got shape {self.shape}")
        topo, visited, stack = [], set(), [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward(node.grad)

    # -- arithmetic --------------------------------------------------------

    @staticmethod
    def _coerce(x):
        return x if isinstance(x, Tensor) else Tensor(x)

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self, other

        def bwd(g):
            if a.requires_grad:
                a._accum(_unbroadcast(g, a.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(g, b.shape))

        return Tensor._make(a.data + b.data, (a, b), bwd)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        a, b = self, other

        def bwd(g):
            if a.requires_grad:
                a._accum(_unbroadcast(g, a.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(-g, b.shape))

        return Tensor._make(a.data - b.data, (a, b), bwd)

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self, other

        def bwd(g):
            if a.requires_grad:
                a._accum(_unbroadcast(g * b.data, a.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(g * a.data, b.shape))

        return Tensor._make(a.data * b.data, (a, b), bwd)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        a, b = self, other

        def bwd(g):
            if a.requires_grad:
                a._accum(_unbroadcast(g / b.data, a.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(-g * a.data / (b.data * b.data), b.shape))

        return Tensor._make(a.data / b.data, (a, b), bwd)

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def __neg__(self):
        return self * (-1.0)

    def __matmul__(self, other):
        other = self._coerce(other)
        a, b = self, other
        out = np.matmul(a.data, b.data)

        def bwd(g):
            # promote 1-D operands so the transposed products below are valid
            ad = a.data if a.ndim > 1 else a.data[None, :]
            bd = b.data if b.ndim > 1 else b.data[:, None]
            g2 = g
            if a.ndim == 1:
                g2 = np.expand_dims(g2, -2)
            if b.ndim == 1:
                g2 = np.expand_dims(g2, -1)
            if a.requires_grad:
                ga = np.matmul(g2, np.swapaxes(bd, -1, -2))
                a._accum(ga.reshape(a.shape) if ga.shape != a.shape and ga.size == a.data.size
                         else _unbroadcast(ga, a.shape) if ga.shape != a.shape else ga)
            if b.requires_grad:
                gb = np.matmul(np.swapaxes(ad, -1, -2), g2)
                b._accum(gb.reshape(b.shape) if gb.shape != b.shape and gb.size == b.data.size
                         else _unbroadcast(gb, b.shape) if gb.shape != b.shape else gb)

        return Tensor._make(out, (a, b), bwd)

    # -- elementwise functions ---------------------------------------------

    def exp(self):
        a = self
        out = np.exp(a.data)

        def bwd(g):
            a._accum(g * out)

        return Tensor._make(out, (a,), bwd)

    def log(self):
        a = self

        def bwd(g):
            a._accum(g / a.data)

        return Tensor._make(np.log(a.data), (a,), bwd)

    def tanh(self):
        a = self
        out = np.tanh(a.data)

        def bwd(g):
            a._accum(g * (1.0 - out * out))

        return Tensor._make(out, (a,), bwd)

    def relu(self):
        a = self
        mask = a.data > 0

        def bwd(g):
            a._accum(g * mask)

        return Tensor._make(a.data * mask, (a,), bwd)

    def sigmoid(self):
        a = self
        out = 1.0 / (1.0 + np.exp(-a.data))

        def bwd(g):
            a._accum(g * out * (1.0 - out))

        return Tensor._make(out, (a,), bwd)

    def sin(self):
        a = self

        def bwd(g):
            a._accum(g * np.cos(a.data))

        return Tensor._make(np.sin(a.data), (a,), bwd)

    def cos(self):
        a = self

        def bwd(g):
            a._accum(-g * np.sin(a.data))

        return Tensor._make(np.cos(a.data), (a,), bwd)

    # -- normalization -----------------------------------------------------

    def softmax(self, axis=-1):
        a = self
        shifted = a.data - a.data.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        out = e / e.sum(axis=axis, keepdims=True)

        def bwd(g):
            dot = (g * out).sum(axis=axis, keepdims=True)
            a._accum(out * (g - dot))

        return Tensor._make(out, (a,), bwd)

    def layer_norm(self, eps=1e-5):
        """Normalize over the last axis (no affine part)."""
        a = self
        mu = a.data.mean(axis=-1, keepdims=True)
        var = a.data.var(axis=-1, keepdims=True)
        inv = 1.0 / np.sqrt(var + eps)
        xhat = (a.data - mu) * inv

        def bwd(g):
            gm = g.mean(axis=-1, keepdims=True)
            gx = (g * xhat).mean(axis=-1, keepdims=True)
            a._accum(inv * (g - gm - xhat * gx))

        return Tensor._make(xhat, (a,), bwd)

    # -- reductions / shape ------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        a = self
        out = a.data.sum(axis=axis, keepdims=keepdims)

        def bwd(g):
            g = np.asarray(g)
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a._accum(np.broadcast_to(g, a.shape))

        return Tensor._make(out, (a,), bwd)

    def mean(self, axis=None, keepdims=False):
        a = self
        out = a.data.mean(axis=axis, keepdims=keepdims)
        count = a.data.size / out.size

        def bwd(g):
            g = np.asarray(g)
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a._accum(np.broadcast_to(g, a.shape) / count)

        return Tensor._make(out, (a,), bwd)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        a = self

        def bwd(g):
            a._accum(g.reshape(a.shape))

        return Tensor._make(a.data.reshape(shape), (a,), bwd)

    def transpose(self, *axes):
        a = self
        if not axes:
            axes = tuple(reversed(range(a.ndim)))
        inv = np.argsort(axes)

        def bwd(g):
            a._accum(g.transpose(inv))

        return Tensor._make(a.data.transpose(axes), (a,), bwd)

    def __getitem__(self, idx):
        a = self

        def bwd(g):
            full = np.zeros_like(a.data)
            np.add.at(full, idx, g)
            a._accum(full)

        return Tensor._make(a.data[idx], (a,), bwd)

    @staticmethod
    def concat(tensors, axis=0):
        tensors = [Tensor._coerce(t) for t in tensors]
        sizes = [t.shape[axis] for t in tensors]
        splits = np.cumsum(sizes)[:-1]

        def bwd(g):
            for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
                if t.requires_grad:
                    t._accum(piece)

        return Tensor._make(np.concatenate([t.data for t in tensors], axis=axis), tensors, bwd)

    # -- convolution -------------------------------------------------------

    def conv2d(self, weight, stride=1, pad=0):
        """x: (N,C,H,W), weight: (O,C,kh,kw) -> (N,O,oh,ow)."""
        x, w = self, self._coerce(weight)
        n, c, h, wid = x.shape
        o, c2, kh, kw = w.shape
        if c != c2:
            raise ValueError(f"conv2d channel mismatch: input {c} vs weight {c2}")
        oh = (h + 2 * pad - kh) // stride + 1
        ow = (wid + 2 * pad - kw) // stride + 1
        if oh < 1 or ow < 1:
            raise ValueError("conv2d output would be empty")
        cols = im2col(x.data, kh, kw, stride, pad)  # (N, C*kh*kw, L)
        w2 = w.data.reshape(o, -1)
        out = np.matmul(w2, cols).reshape(n, o, oh, ow)

        def bwd(g):
            g2 = g.reshape(n, o, oh * ow)
            if w.requires_grad:
                gw = np.einsum("nol,nkl->ok", g2, cols).reshape(w.shape)
                w._accum(gw)
            if x.requires_grad:
                gcols = np.matmul(w2.T, g2)
                x._accum(col2im(gcols, x.shape, kh, kw, stride, pad))

        return Tensor._make(out, (x, w), bwd)

    def transposed_conv2d(self, weight, stride=1, pad=0):
        """x: (N,C,H,W), weight: (C,O,kh,kw) -> (N,O,(H-1)s-2p+kh, ...)."""
        x, w = self, self._coerce(weight)
        n, c, h, wid = x.shape
        c2, o, kh, kw = w.shape
        if c != c2:
            raise ValueError(f"transposed_conv2d channel mismatch: input {c} vs weight {c2}")
        oh = (h - 1) * stride - 2 * pad + kh
        ow = (wid - 1) * stride - 2 * pad + kw
        if oh < 1 or ow < 1:
            raise ValueError("transposed_conv2d output would be empty")
        w2 = w.data.reshape(c, o * kh * kw)
        xf = x.data.reshape(n, c, h * wid)
        cols = np.matmul(w2.T[None], xf)  # (N, O*kh*kw, H*W)
        out = col2im(cols, (n, o, oh, ow), kh, kw, stride, pad)

        def bwd(g):
            gcols = im2col(g, kh, kw, stride, pad)  # (N, O*kh*kw, H*W)
            if x.requires_grad:
                x._accum(np.matmul(w2[None], gcols).reshape(x.shape))
            if w.requires_grad:
                gw = np.einsum("ncl,nkl->ck", xf, gcols).reshape(w.shape)
                w._accum(gw)

        return Tensor._make(out, (x, w), bwd)

    # -- attention ---------------------------------------------------------

    def attention(self, key, value):
        """Fused scaled dot-product attention.

        self/key/value: (..., T, d); returns softmax(q k^T / sqrt(d)) v.
        """
        q, k, v = self, self._coerce(key), self._coerce(value)
        d = q.shape[-1]
        scale = 1.0 / np.sqrt(d)
        scores = np.matmul(q.data, np.swapaxes(k.data, -1, -2)) * scale
        scores -= scores.max(axis=-1, keepdims=True)
        e = np.exp(scores)
        attn = e / e.sum(axis=-1, keepdims=True)
        out = np.matmul(attn, v.data)

        def bwd(g):
            if v.requires_grad:
                gv = np.matmul(np.swapaxes(attn, -1, -2), g)
                v._accum(_unbroadcast(gv, v.shape) if gv.shape != v.shape else gv)
            ga = np.matmul(g, np.swapaxes(v.data, -1, -2))
            gs = attn * (ga - (ga * attn).sum(axis=-1, keepdims=True))
            if q.requires_grad:
                gq = np.matmul(gs, k.data) * scale
                q._accum(_unbroadcast(gq, q.shape) if gq.shape != q.shape else gq)
            if k.requires_grad:
                gk = np.matmul(np.swapaxes(gs, -1, -2), q.data) * scale
                k._accum(_unbroadcast(gk, k.shape) if gk.shape != k.shape else gk)

        return Tensor._make(out, (q, k, v), bwd)


# Operation names exposed for the exhaustive gradient test suite.
OP_NAMES = (
    "matmul",
    "conv2d",
    "transposed_conv2d",
    "add",
    "mul",
    "sub",
    "div",
    "exp",
    "log",
    "tanh",
    "relu",
    "sigmoid",
    "softmax",
    "layer_norm",
    "mean",
    "sum",
    "concat",
    "slice",
    "reshape",
    "sin",
    "cos",
    "scaled_dot_product_attention",
)
