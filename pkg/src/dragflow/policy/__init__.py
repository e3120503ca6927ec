"""Action heads, hand-rolled differentiation, training and checkpoints."""
from .autograd import Tensor, concat, parameter
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .diffusion import NoisePredictor, alpha_bar, denoise, denoise_chunk, diffusion_loss
from .discrete import EndpointClassifier, N_BINS, bin_centers, predict_single_shot, to_bins, token_loss
from .encoding import decode_chunk, encode_chunk, xy_from_net, xy_to_net
from .flow import VelocityField, directional_penalty, flow_loss, flow_objective, integrate, sample_chunk, sample_chunks
from .nn import MLP, Adam, time_embedding
from .oracle import OracleReplay
from .train import HeadMode, Model, ModelKind, NumericalError, TrainConfig, TrainResult, build_heads, train

__all__ = [
    "Adam", "CheckpointError", "EndpointClassifier", "HeadMode", "MLP", "Model", "ModelKind", "N_BINS",
    "NoisePredictor", "NumericalError", "OracleReplay", "Tensor", "TrainConfig", "TrainResult", "VelocityField",
    "alpha_bar", "bin_centers", "build_heads", "concat", "decode_chunk", "denoise", "denoise_chunk",
    "diffusion_loss", "directional_penalty", "encode_chunk", "flow_loss", "flow_objective", "integrate",
    "load_checkpoint", "parameter", "predict_single_shot", "sample_chunk", "sample_chunks", "save_checkpoint",
    "time_embedding", "to_bins", "token_loss", "train", "xy_from_net", "xy_to_net",
]
