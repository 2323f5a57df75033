"""Dense tensor autodiff, message-passing layers, and their training loop."""

from .autograd import Tensor, concat, bce_with_logits, masked_softmax  # noqa: F401
from .layers import GnnConfig, GnnModel, ARCHITECTURES  # noqa: F401
from .train import TrainResult, train, predict_logits, predict_labels, accuracy_on  # noqa: F401
from .batching import GraphTensors, batch_graphs  # noqa: F401
from .sweep import SearchSpace, SweepTrial, SweepResult, random_search  # noqa: F401
from .presets import final_config  # noqa: F401
