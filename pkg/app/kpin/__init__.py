"""KPIN gain network, optimizer and hybrid training loop."""
from app.kpin.network import (
    KpinNetwork,
    KpinParameters,
    GainFeatures,
    RecurrentState,
    ForwardTape,
    BpttAccumulator,
    forward,
    backward,
    bptt_accumulate,
)
from app.kpin.optim import Adam
from app.kpin.training import (
    HybridState,
    HybridRollout,
    TrainResult,
    SubsequenceBatch,
    initial_hybrid_state,
    hybrid_ftp_step,
    single_step_loss,
    epoch_objective,
    segment,
    objective_and_gradient,
    train,
    kpin_predict,
)

__all__ = [
    'KpinNetwork',
    'KpinParameters',
    'GainFeatures',
    'RecurrentState',
    'ForwardTape',
    'BpttAccumulator',
    'forward',
    'backward',
    'bptt_accumulate',
    'Adam',
    'HybridState',
    'HybridRollout',
    'TrainResult',
    'SubsequenceBatch',
    'initial_hybrid_state',
    'hybrid_ftp_step',
    'single_step_loss',
    'epoch_objective',
    'segment',
    'objective_and_gradient',
    'train',
    'kpin_predict',
]
