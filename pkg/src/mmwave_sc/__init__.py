"""Source-coding based mmWave channel estimation."""

from .channel import AngularChannel, ArrayGeometry, PathSpec, dft_matrix, sample_channel
from .decoders import MlpDecoder, SearchDecoder, decode_mimo, search_decode_simo
from .gf2codes import CodeSpec, is_injective_over_supports, min_measurements_lower_bound
from .harness import ScenarioConfig, emit_results, load_config, preset, run_experiment
from .measurement import LinkBudget, acquire, build_combiners, build_precoders

__version__ = "0.1.0"

__all__ = [
    "AngularChannel", "ArrayGeometry", "PathSpec", "dft_matrix", "sample_channel",
    "MlpDecoder", "SearchDecoder", "decode_mimo", "search_decode_simo",
    "CodeSpec", "is_injective_over_supports", "min_measurements_lower_bound",
    "ScenarioConfig", "emit_results", "load_config", "preset", "run_experiment",
    "LinkBudget", "acquire", "build_combiners", "build_precoders",
]
