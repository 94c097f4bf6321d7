"""Statistical-physics tools for machine learning experiments.

Entropy and information measures, Monte Carlo estimators, Ising-model
sampling with exact small-system references, simulated annealing,
energy-based losses and a small Boltzmann machine, FFT convolution,
three-hypothesis boosting, free-energy planning, mean-field variational
inference, mean-field multi-agent Q-learning, and a seeded CLI runner.
"""

from .activeinf import (
    DiscreteMDP,
    FactorizedPosterior,
    GenerativeModel,
    expected_free_energy,
    fe_value_iteration,
    helmholtz_free_energy,
    mean_field_kl,
    mean_field_update,
    value_iteration,
    variational_free_energy,
)
from .anneal import AnnealResult, CoolingSchedule, EnergyLandscape, anneal, schedule_temperature
from .boost import (
    NoisyThresholdLearner,
    WeightedDataset,
    boost3,
    boost_error_bound,
    boost_recursion_depth,
    boost_recursive,
    empirical_risk,
    majority_vote,
    reweight_d2,
    reweight_d3,
)
from .convolution import conv_fft, conv_naive, fft_radix2, ifft_radix2
from .digest import (
    DigestLandscape,
    DigestOrdering,
    DoubleDigestInstance,
    brute_force_min_energy,
    double_digest_energy,
    double_digest_implied_fragments,
    generate_instance,
)
from .distributions import DiscreteDistribution, JointDistribution
from .ebm import (
    BMState,
    BoltzmannMachine,
    bm_energy,
    bm_exact_gradient,
    bm_gibbs_sample,
    bm_log_likelihood,
    bm_partition_exact,
    bm_train,
    ebl_infer,
    gibbs_posterior,
    loss_hinge,
    loss_nll,
    loss_perceptron,
)
from .errors import (
    CapacityError,
    ConvergenceError,
    DegenerateSplitError,
    DomainError,
    NumericalError,
    ThermolearnError,
    ValidationError,
)
from .info import (
    entropy_gibbs,
    entropy_nats,
    entropy_shannon,
    ib_objective,
    info_gain,
    kl_divergence,
    mutual_information,
)
from .ising import (
    CouplingGraph,
    boltzmann_entropy,
    chain_graph,
    complete_graph,
    estimate_observables,
    ising_energy,
    metropolis_chain,
    metropolis_step,
    partition_exact,
)
from .learning_theory import approximation_ratio, pac_sample_bound
from .marl import (
    IsingGameEnv,
    NeighborGraph,
    QTable,
    boltzmann_policy,
    mean_action,
    mf_actor_critic_grad,
    mf_q_update,
    mf_value,
    run_ising_game,
    torus_graph,
)
from .rng import RngStream
from .sampling import Bernoulli, Exponential, UniformReal, clt_standardized_sums, importance_estimate
from .trace import Trace

__version__ = "0.1.0"
