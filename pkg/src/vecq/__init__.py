"""Vector-loss weight quantization toolkit.

Quantizes weight vectors by decomposing the quantization loss into an
orientation part (solved by interval steering on a half-integer code grid)
and a modulus part (solved in closed form by least-squares scaling), with
baseline quantizers, an interval-table solver for the standard-normal prior,
and a small quantized-training harness.
"""

from .baselines import BaselineResult, iterative_l2, linear_round, sign_binary
from .density import KdeModel, NormalModel, fit_kde, fit_normal, kde_pdf, silverman_bandwidth, standardize
from .io import (
    BadMagicError,
    CrcMismatchError,
    LayerRecord,
    QuantReport,
    TensorFileError,
    TruncatedPayloadError,
    layer_record,
    read_report,
    read_tensor,
    write_report,
    write_tensor,
)
from .kernels import active_backend, set_backend
from .quantizer import (
    QuantResult,
    drive,
    modulus_loss,
    orientation_loss,
    quantize,
    quantize_fixed_lambda,
    steer,
)
from .template import (
    LambdaTemplate,
    OrientationCurve,
    REFERENCE_LAMBDA,
    curve,
    default_template,
    empirical_lambda,
    orientation_loss_normal,
    solve_lambda,
)
from .tensor import SampleStats, Tensor, cosine, dot, flatten, norm, stats, unflatten
from .train import (
    LayerState,
    Network,
    TrainConfig,
    backward_and_update,
    forward,
    load_idx_images,
    load_idx_labels,
    make_moons,
    quantize_activation,
    train_demo,
)

__version__ = "0.1.0"
