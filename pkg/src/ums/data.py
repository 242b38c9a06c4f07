"""Reference data for the six-mode linear-optical CNOT case study.

``CNOT_BLOCK_RAW`` and ``CNOT_PHASES`` are transcribed digit for digit. The
block is printed to ~9 significant digits, so it is unitary only to ~7e-9;
:func:`cnot_block` returns its polar projection; with it the tabulated
phases give 1 - F = 3.33e-8.
"""
import numpy as np

from .linalg import nearest_unitary

_S3 = 1 / np.sqrt(3)
_S23 = np.sqrt(2 / 3)

CNOT = np.array(
    [
        [-_S3, _S23, 0, 0, 0, 0],
        [_S23, _S3, 0, 0, 0, 0],
        [0, 0, _S3, _S3, _S3, 0],
        [0, 0, _S3, -_S3, 0, _S3],
        [0, 0, _S3, 0, -_S3, -_S3],
        [0, 0, 0, _S3, -_S3, _S3],
    ],
    dtype=complex,
)

CNOT_BLOCK_RAW = np.array(
    [
        [0.32616497 + 0.169709745j, -0.38944321 + 0.385222961j, -0.07487433 + 0.0140016576j,
         -0.56092302 + 0.144894222j, -0.09178299 + 0.182186722j, -0.37672097 - 0.199464971j],
        [-0.59574492 + 0.341910943j, -0.06002442 + 0.0889329420j, 0.16555801 + 0.101417636j,
         -0.23277056 + 0.332764918j, 0.50921371 - 0.219642136j, 0.04267885 - 0.0685604080j],
        [-0.11404973 - 0.0005635556j, 0.50625739 - 0.0702574186j, -0.28217237 - 0.692726708j,
         -0.22904901 - 0.008906423j, 0.0634065 + 0.0378401459j, -0.17627259 - 0.277850848j],
        [0.21269847 + 0.405463432j, -0.01962757 + 0.030734163j, 0.00386132 - 0.166814050j,
         0.11549117 - 0.405381161j, 0.52450465 + 0.316155727j, -0.12388211 + 0.439441303j],
        [-0.19696007 + 0.129259070j, -0.2829352 + 0.136684498j, -0.23585629 - 0.394794001j,
         -0.07037407 + 0.253348908j, -0.32129528 + 0.173338317j, 0.47736737 + 0.451640055j],
        [0.02205175 - 0.338176828j, -0.57000713 + 0.0471133316j, -0.12412351 - 0.377189984j,
         0.43404681 + 0.108197637j, 0.33695188 - 0.153353789j, -0.13322881 - 0.213157689j],
    ]
)

# rows: channels 1..5 (channel 6 carries no phase); columns: phase layers 1..7
CNOT_PHASES = np.array(
    [
        [2.51592377, 3.52826283, 0.87421821, 3.24176442, 2.92188993, 1.24223769, 4.30510568],
        [0.96157148, 2.57238693, 4.75174626, 2.81009478, 3.53499635, 3.46774956, 6.21377173],
        [5.5529059, 3.32914678, 1.0145169, 6.25955126, 1.27532946, 0.43181492, 0.91744755],
        [1.61215433, 2.30343223, 3.12035203, 4.50728974, 1.78382232, 4.68552694, 2.70720777],
        [1.50025594, 2.0348859, 1.36720772, 4.31057832, 1.88508855, 2.81028466, 0.20069949],
    ]
)

REPORTED_CNOT_INFIDELITY = 3.3e-8


def cnot_block() -> np.ndarray:
    return nearest_unitary(CNOT_BLOCK_RAW)


def cnot_phase_vector() -> np.ndarray:
    """Phases flattened layer by layer, matching the variant-a ordering."""
    return CNOT_PHASES.T.reshape(-1).copy()
