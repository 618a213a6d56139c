# 服务模块
from .proof_service import ProofService
from .machine_service import MachineService
from .circuit_service import CircuitService

__all__ = [
    "ProofService",
    "MachineService",
    "CircuitService"
]
