"""Memory equations and their loop-structured Markov embeddings."""

from ._core import (
    Kernel,
    LoopGenerator,
    MemchainError,
    build_cyclic_generator,
    build_generator,
    chain_approximation,
    closed_form,
    cyclic_spectrum,
    dde_char_roots,
    decompose_to_loop,
    equilibrium,
    erlang_kernel,
    from_mean_times,
    integrate,
    kernel_components,
    lagrange_psi,
    me_to_mp,
    mp_to_me,
    partition_constant,
    positivity_check,
    simulate,
    solve_dde,
    solve_me,
    solve_me_via_mp,
    spectrum,
    stationary,
    weighted_minimum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
