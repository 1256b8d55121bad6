"""Link-level simulator for an RIS-aided MIMO ISAC uplink.

A large reflecting sub-surface relays the UE's uplink to the BS while two
small sensing sub-surfaces localize the UE from the same data signal. The
localization result then drives the phase-2 UE/BS/RIS beamformers.
"""

from risisac.geometry import (
    EffectiveAnglePair,
    UlaGeometry,
    UraGeometry,
    Vec3,
    effective_angles_between,
    ue_effective_aod,
    ula_steering,
    ura_steering,
)

__version__ = "0.1.0"

__all__ = [
    "EffectiveAnglePair",
    "UlaGeometry",
    "UraGeometry",
    "Vec3",
    "effective_angles_between",
    "ue_effective_aod",
    "ula_steering",
    "ura_steering",
]
