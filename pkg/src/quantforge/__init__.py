"""Quantized-network accelerator estimation toolkit.

Parse a topology, transform it to integer-only form, then size and
schedule FPGA implementations of it: per-layer cost estimates, a
work-balancing folding search, offload schedules, rooflines, and
precision sweeps. The reference executor ties it together by proving
the transforms preserve semantics.
"""

from .costmodel import (
    DEFAULT_COEFFS,
    CostCoefficients,
    PlatformSpec,
    ResourceEstimate,
    accelerator_cost,
    fit_coefficients,
    get_platform,
    layer_cost,
    load_measurements,
    load_platform_catalog,
    mac_lut_cost,
    swu_bram,
    wm_bram,
    within_budget,
)
from .dse import (
    AcceleratorDesign,
    PerfEstimate,
    Schedule,
    balance_dataflow,
    estimate_performance,
    feasible,
    roofline,
    schedule_multilayer_offload,
    sweep,
    tile_parallelism,
)
from .errors import QuantforgeError
from .frontend import (
    emit_topology,
    load_parameters,
    parameter_slots,
    parse_topology,
    random_parameter_blob,
    workload_report,
)
from .ir import Network, Precision, TensorShape, infer_shapes, validate
from .passes import (
    PASS_NAMES,
    direct_quantize,
    lower_to_blocks,
    reorder_maxpool,
    run_pipeline,
    set_precision,
    streamline,
)
from .refexec import ValueTensor, execute

__version__ = "0.1.0"

__all__ = [
    "AcceleratorDesign",
    "CostCoefficients",
    "DEFAULT_COEFFS",
    "Network",
    "PASS_NAMES",
    "PerfEstimate",
    "PlatformSpec",
    "Precision",
    "QuantforgeError",
    "ResourceEstimate",
    "Schedule",
    "TensorShape",
    "ValueTensor",
    "accelerator_cost",
    "balance_dataflow",
    "direct_quantize",
    "emit_topology",
    "estimate_performance",
    "execute",
    "feasible",
    "fit_coefficients",
    "get_platform",
    "infer_shapes",
    "layer_cost",
    "load_measurements",
    "load_parameters",
    "load_platform_catalog",
    "lower_to_blocks",
    "mac_lut_cost",
    "parameter_slots",
    "parse_topology",
    "random_parameter_blob",
    "reorder_maxpool",
    "roofline",
    "run_pipeline",
    "schedule_multilayer_offload",
    "set_precision",
    "streamline",
    "sweep",
    "swu_bram",
    "tile_parallelism",
    "validate",
    "within_budget",
    "wm_bram",
    "workload_report",
]
