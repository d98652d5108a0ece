"""Measure constructions and the dispatcher from parameter documents to builders."""
from .factorization import FactorizedMeasure, build_geometric_factorization
from .heavy_core import HeavyCoreMeasure, build_heavy_core
from .params import CONSTRUCTIONS, PRESETS, ConstructionParams
from .restriction_geo import RestrictionGeoBundle, build_restriction_geometric
from .restriction_nongeo import NongeoRestrictionFamily, build_restriction_nongeometric
from .salem import SalemFamily, build_salem

BUILDERS = {
    "salem": build_salem,
    "heavy-core": build_heavy_core,
    "geo-factorization": build_geometric_factorization,
    "restriction-geo": build_restriction_geometric,
    "restriction-nongeo": build_restriction_nongeometric,
}


def build(params):
    return BUILDERS[params.construction](params)
