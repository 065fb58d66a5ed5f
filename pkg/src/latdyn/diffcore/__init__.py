from .fdcheck import evaluate, finite_difference_check, gradient
from .tensor import OP_NAMES, Tensor

__all__ = ["Tensor", "OP_NAMES", "evaluate", "gradient", "finite_difference_check"]
