"""Coupled urban canopy, building energy and radiation model for shoebox districts."""

from .morphology import Building, Scene, generate_case, layer_stats, tile
from .params import Params, apply_overrides
from .simulation import RunConfig, RunResults, WeatherSeries, run, synth_weather

__all__ = [
    "Building", "Scene", "generate_case", "layer_stats", "tile", "Params", "apply_overrides",
    "RunConfig", "RunResults", "WeatherSeries", "run", "synth_weather",
]
__version__ = "0.1.0"
