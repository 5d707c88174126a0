"""Color style transfer with image-adaptive linear color maps.

A thumbnail encoder predicts two small matrices per image: one maps the image
into a learned style-free space, the other re-styles any such image. Because
the per-pixel map is deterministic and pixel-independent, results are
artifact-free, arbitrarily large images run in constant memory, and styles
serialize to reusable kilobyte-sized presets.
"""

from .autodiff import AdamState, Tape, Tensor, adam_step
from .bench import BenchRecord, bench_patch_sweep, format_bench_csv
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .encoder import EncoderConfig, EncoderWeights, encode, encode_backward, init_weights
from .estimator import ColorStyleTransfer, NotFittedError, as_image
from .imaging import (
    Image,
    MalformedRasterError,
    TileGrid,
    Thumbnail,
    UnsupportedBitDepthError,
    downsample,
    load_raster,
    save_raster,
    tile,
)
from .lut import CubeParseError, Lut3D, apply_lut, parse_cube, serialize_cube
from .augment import FilterParams, apply_filter, make_pair, random_filter
from .mapping import (
    ColorMapMatrix,
    ProjectionPair,
    apply_color_map,
    apply_color_map_tiled,
    color_map_backward,
)
from .model import Model
from .pipeline import (
    FingerprintMismatch,
    NormalizedImage,
    normalize,
    stylize,
    stylize_sequence,
    transfer,
)
from .presets import Preset, extract_preset, load_preset, save_preset
from .service import create_server
from .synth import make_corpus, make_image
from .training import (
    LossReport,
    TrainConfig,
    consistency_loss,
    reconstruction_loss,
    train,
    train_step,
)

__version__ = "0.1.0"
