"""Band-selective shaped-pulse simulator and designer for NV-center spin control."""

__version__ = "0.1.0"

from .experiments import (  # noqa: F401
    MultiFlipResult,
    PulseSpec,
    RabiTrace,
    SignalModel,
    SweepResult,
    flip_amplitude,
    frequency_sweep,
    multi_flip,
    rabi_beating,
)
from .optimizer import (  # noqa: F401
    AnnealingSchedule,
    ObjectiveSpec,
    OptimizationResult,
    anneal,
    design_shape,
    evaluate_objective,
    refine,
)
from .propagator import (  # noqa: F401
    BlochVector,
    ResponseProfile,
    TwoLevelUnitary,
    analytic_rabi,
    apply,
    excitation_profile,
    pulse_unitaries,
    pulse_unitary,
    slice_unitary,
)
from .shapes import (  # noqa: F401
    FourierShape,
    PulseEnvelope,
    builtin_shape,
    builtin_shape_names,
    gaussian,
    hermite,
    load_shape_file,
    rectangular,
    resolve_shape,
    synthesize_fourier,
)
from .spin_model import (  # noqa: F401
    HamiltonianMatrix,
    LineSet,
    MagneticField,
    NVParameters,
    SpinSystemConfig,
    TransitionLine,
    build_hamiltonian,
    detuned_lines,
    jacobi_eigh,
    lineset_from_frequencies,
    load_spin_config,
    spin_config_from_dict,
    transition_lines,
)
