"""Deterministic generation of synthetic plankton-tracking benchmarks"""
from ..loggers import GENERATE_LOGGER
from .backgrounds import (
    PRESETS,
    BackgroundSpec,
    estimate_background,
    get_preset,
    render_background,
    sample_impurities,
)
from .benchmark import (
    SequencePlan,
    generate_benchmark,
    generate_sequence,
    plan_benchmark,
    read_frame,
    relabel_ids,
    sequence_seed,
    splitmix64,
    stream_sequence,
    write_frame,
)
from .compositing import composite_frame, place_sprite, placement_radius
from .motion import MotionState, step_motion
from .scenario import (
    GenerationError,
    ScenarioConfig,
    choose_sprites,
    sample_scenario,
    sprite_library,
)
from .sprites import (
    SpriteAsset,
    build_sprite_library,
    draw_sprite,
    load_sprite_directory,
    nominal_diameter,
    opaque_bounds,
)

__all__ = [
    "GENERATE_LOGGER",
    "PRESETS",
    "BackgroundSpec",
    "GenerationError",
    "MotionState",
    "ScenarioConfig",
    "SequencePlan",
    "SpriteAsset",
    "build_sprite_library",
    "choose_sprites",
    "composite_frame",
    "draw_sprite",
    "estimate_background",
    "generate_benchmark",
    "generate_sequence",
    "get_preset",
    "load_sprite_directory",
    "nominal_diameter",
    "opaque_bounds",
    "place_sprite",
    "placement_radius",
    "plan_benchmark",
    "read_frame",
    "relabel_ids",
    "render_background",
    "sample_impurities",
    "sample_scenario",
    "sequence_seed",
    "splitmix64",
    "sprite_library",
    "step_motion",
    "stream_sequence",
    "write_frame",
]
