"""Interactive force-impedance control: simulator, tanks, baselines, auditor."""

from ific.geometry import (
    DirectionalBasis,
    build_directional_basis,
    interaction_powers,
    rotate_gain,
)
from ific.tanks import TankParams, TankState, chamber_damping
from ific.controller import GainSet, Reference, IficController
from ific.plant import PlantModel, PlantState, EnvironmentModel

__all__ = [
    "DirectionalBasis",
    "build_directional_basis",
    "interaction_powers",
    "rotate_gain",
    "TankParams",
    "TankState",
    "chamber_damping",
    "GainSet",
    "Reference",
    "IficController",
    "PlantModel",
    "PlantState",
    "EnvironmentModel",
]
