"""
Unit conventions and conversions.

Internal units: stocks in vehicles, demand in vehicle-km, mileage in km/y,
emission factors in g CO2/km, emissions in tonnes CO2, money in €.
Reports use Mt and Gt for emissions and G€ for budgets.
"""

GRAMS_PER_TONNE = 1e6
TONNES_PER_MT = 1e6
TONNES_PER_GT = 1e9
EUR_PER_GEUR = 1e9
VKM_PER_MVKM = 1e6


def grams_to_tonnes(grams):
    return grams / GRAMS_PER_TONNE


def tonnes_to_mt(tonnes):
    return tonnes / TONNES_PER_MT


def tonnes_to_gt(tonnes):
    return tonnes / TONNES_PER_GT


def gt_to_tonnes(gt):
    return gt * TONNES_PER_GT


def eur_to_geur(eur):
    return eur / EUR_PER_GEUR


def mvkm_to_vkm(mvkm):
    return mvkm * VKM_PER_MVKM


def vehicle_emissions_tonnes(mileage_km, factor_g_per_km):
    """Tonnes of CO2 emitted per vehicle per year."""
    return grams_to_tonnes(mileage_km * factor_g_per_km)


def mt_to_grams(mt):
    return mt * TONNES_PER_MT * GRAMS_PER_TONNE
