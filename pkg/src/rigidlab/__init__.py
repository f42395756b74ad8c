"""Numerical laboratory for rigidity of Anosov suspension flows over toral automorphisms."""

from .errors import *  # noqa: F401,F403
from .fields import FiberWeight, ScalarField
from .toral import (
    HomoclinicPoint,
    MapOrbit,
    ToralAutomorphism,
    enumerate_periodic_orbits,
    homoclinic_point,
    make_automorphism,
    shadowing_periodic_point,
)
from .suspension import FlowOrbitData, SuspensionFlow, make_suspension, orbit_flow_data, weight_integral
from .cocycles import abelian_coboundary_test, matching_report, periodic_obstructions
from .jets import PlanarJet, make_jet, moser_normal_form
from .longitudinal import longitudinal_cocycle, transversal_independence_check, verify_cocycle_identities
from .asymptotics import classify_case, estimate_T_prime, homoclinic_periods, recover_exponent
from .equilibrium import (
    Potential,
    alternate_livshits_demo,
    bowen_integral,
    build_ensemble,
    measure_approx,
    pigeonhole_certificate,
    positive_proportion,
)

__version__ = "0.1.0"
