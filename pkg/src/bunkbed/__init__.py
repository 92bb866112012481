"""Exact, certified and Monte Carlo bunkbed percolation."""
from .analysis import (
    GapReport,
    PerEdgeGapPolynomial,
    ScanReport,
    Sign,
    UnivariateGapPolynomial,
    batch_scan,
    bbc_gap_exact,
    complete_bbc_gap_exact,
    counterexample_gap,
    gap_polynomial_per_edge,
    gap_polynomial_univariate,
)
from .certified import CertifiedNumber
from .exact import (
    EnumerationCapExceeded,
    HyperedgeKernel,
    TerminalPartition,
    check_eq390,
    check_hk,
    connect_prob_exact,
    gadget_kernel_bruteforce,
    gadget_kernel_closed,
    kernel_gap_lower_bound,
    terminal_kernel_exact,
)
from .graphs import (
    BunkbedInstance,
    Edge,
    Hyperedge,
    Hypergraph3,
    WeightedGraph,
    build_bunkbed_graph,
    build_complete_clone_instance,
    build_gadget,
    build_hollom,
    substitute_gadgets,
)
from .hyper import alt_bunkbed_probs, verify_robust_lemma, wz_bunkbed_probs
from .kernels import BACKEND
from .montecarlo import McEstimate, mc_early_stop_policy, mc_gap_alternative, mc_gap_standard

__version__ = "0.1.0"
