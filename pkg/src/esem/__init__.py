"""ESEM signature toolkit.

A Schnorr-family signature scheme whose signing needs no group operations:
the ephemeral commitment is reconstructed at verification time from l
semi-honest party servers, while the signer derives the matching nonce from
seeds with a handful of PRF calls, one modular multiplication and no new
randomness.  Includes the Schnorr and single-party BPV baselines, a binary
party protocol with client fan-out, a benchmark harness with operation
counting, and the energy model for battery-powered sensing scenarios.
"""

from .errors import (
    CommitmentUnavailable,
    CounterError,
    DecodeError,
    Error,
    IntegrityError,
    ParameterError,
    ProtocolError,
    UnknownKeyError,
)
from .groupmath import GroupElement, GroupParams, OpCounter, RISTRETTO255, Scalar
from .kdf import CommitmentTag, IndexSet, Seed
from .scheme import (
    EsemMode,
    EsemPublicKey,
    EsemSignature,
    EsemSigningKey,
    LocalPartySet,
    PersistentSigner,
    VerifyOutcome,
    esem2_expand,
    keygen,
    key_id,
    sign,
    sign_at_counter,
    verify,
)
from .snodbpv import ESEM_PARAMS, ESEM2_PARAMS, PartyShare, SnodParams

__version__ = "0.1.0"

__all__ = [
    "CommitmentTag",
    "CommitmentUnavailable",
    "CounterError",
    "DecodeError",
    "ESEM2_PARAMS",
    "ESEM_PARAMS",
    "Error",
    "EsemMode",
    "EsemPublicKey",
    "EsemSignature",
    "EsemSigningKey",
    "GroupElement",
    "GroupParams",
    "IndexSet",
    "IntegrityError",
    "LocalPartySet",
    "OpCounter",
    "ParameterError",
    "PartyShare",
    "PersistentSigner",
    "ProtocolError",
    "RISTRETTO255",
    "Scalar",
    "Seed",
    "SnodParams",
    "UnknownKeyError",
    "VerifyOutcome",
    "esem2_expand",
    "key_id",
    "keygen",
    "sign",
    "sign_at_counter",
    "verify",
    "__version__",
]
