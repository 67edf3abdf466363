"""
Embedded claim-count datasets (table1 .. table8), their NDOPPE coefficient
configurations and the published fitted values used to score a report.
"""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import DatasetParseError, EmptyDatasetError, ParameterError
from .fitting import CountDataset, check_cells

DATA_DIR = Path(__file__).parent / "data"

FIXTURE_NAMES = tuple(f"table{i}" for i in range(1, 9))

TABLE_COEFFS: Dict[str, List[float]] = {
    "table1": [1.0, 1.0],
    "table2": [1.0, 1.0, 1.0, 1.0],
    "table3": [1.0, 1.0],
    "table4": [1.0, 1.0],
    "table5": [1.0, 3.35],
    "table6": [1.0, 1.0],
    "table7": [1.0, 0.01, 0.01],
    "table8": [1.0, 1.0],
}

# Published fitted counts, negative log-likelihoods and chi-square values.
REFERENCE: Dict[str, Dict[str, dict]] = {
    "table1": {
        "poisson": {"fitted": [102627.9, 15923.36, 1235.304, 63.8884, 2.478171, 0.07690074, 0.001988605],
                    "nll": 55108.46, "chi_sq": 4218.796},
        "negbin": {"fitted": [103217.2, 14861.67, 1604.886, 154.0523, 13.86321, 1.197651, 0.1005918],
                   "nll": 54697.39, "chi_sq": 251.3145},
        "ndoppe": {"fitted": [103519.4, 14339.05, 1765.495, 203.7906, 22.58254, 2.432916, 0.2567596],
                   "nll": 54630.26, "chi_sq": 57.37906},
    },
    "table2": {
        "poisson": {"fitted": [369253.7, 48637.64, 3203.244, 140.6425, 4.631312, 0.1220061],
                    "nll": 171373.2, "chi_sq": 667.7778},
        "negbin": {"fitted": [370786.0, 45826.83, 4247.933, 350.0120, 27.03706, 2.004967],
                   "nll": 171152.4, "chi_sq": 38.32639},
        "ndoppe": {"fitted": [370651.6, 46250.37, 4027.637, 290.5628, 18.63986, 1.103071],
                   "nll": 171139.3, "chi_sq": 14.53022},
    },
    "table3": {
        "poisson": {"fitted": [7635.46, 1636.852, 175.4500, 12.53737, 0.6719245, 0.02880876,
                               0.001029313, 3.152271e-05],
                    "nll": 5490.781, "chi_sq": 48229.53},
        "negbin": {"fitted": [7718.056, 1494.167, 216.9461, 27.99961, 3.387843, 0.3935191,
                              0.04443999, 0.004916174],
                   "nll": 5388.843, "chi_sq": 651.966},
        "ndoppe": {"fitted": [7757.174, 1428.108, 233.7039, 35.85438, 5.280678, 0.7561408,
                              0.1060622, 0.01464467],
                   "nll": 5367.193, "chi_sq": 248.2751},
    },
    "table4": {
        "poisson": {"fitted": [3668.600, 317.2765, 13.71973, 0.3955141, 0.008551448, 0.0001479133],
                    "nll": 1246.077, "chi_sq": 7982.045},
        "negbin": {"fitted": [3675.159, 304.7798, 18.95647, 1.048036, 0.05432081, 0.002702885],
                   "nll": 1221.197, "chi_sq": 598.55},
        "ndoppe": {"fitted": [3678.629, 298.3138, 21.50345, 1.453163, 0.09427396, 0.005946133],
                   "nll": 1213.141, "chi_sq": 304.7557},
    },
    "table5": {
        "poisson": {"fitted": [96688.27, 9774.58, 494.0744, 16.64928, 0.4207845],
                    "nll": 36188.25, "chi_sq": 335.9228},
        "negbin": {"fitted": [96929.48, 9325.676, 672.924, 43.16177, 2.595396],
                   "nll": 36106.19, "chi_sq": 18.05162},
        "ndoppe": {"fitted": [96981.69, 9227.194, 711.7372, 49.85381, 3.303031],
                   "nll": 36104.22, "chi_sq": 10.87023},
    },
    "table6": {
        "poisson": {"fitted": [20417.77, 2947.815, 212.7954, 10.24078, 0.3696281, 0.01067301, 0.0002568194],
                    "nll": 10297.85, "chi_sq": 4167.816},
        "negbin": {"fitted": [20522.27, 2760.887, 278.5692, 24.98418, 2.100720, 0.1695675, 0.01330708],
                   "nll": 10233.72, "chi_sq": 100.8537},
        "ndoppe": {"fitted": [20572.3, 2671.185, 308.2993, 33.35894, 3.46516, 0.3499451, 0.03461957],
                   "nll": 10224.71, "chi_sq": 33.21162},
    },
    "table7": {
        "poisson": {"fitted": [67424.99, 12363.00, 1133.436, 69.27539, 3.175573, 0.1164542, 0.003558829,
                               9.322066e-05, 2.136610e-06, 4.352973e-08, 7.981583e-10, 1.330453e-11],
                    "nll": 44481.26, "chi_sq": 312143246723.0},
        "negbin": {"fitted": [67960.82, 11415.29, 1438.059, 161.0327, 16.90529, 1.703736, 0.1669351,
                              0.01602279, 0.001513872, 0.0001412684, 1.305077e-05, 1.195703e-06],
                   "nll": 42392.02, "chi_sq": 4146376.0},
        "ndoppe": {"fitted": [68472.88, 10556.37, 1652.717, 262.0185, 41.94244, 6.760695, 1.09478,
                              0.1777548, 0.02889426, 0.004696679, 0.0007627534, 0.0001236865],
                   "nll": 41257.56, "chi_sq": 53609.78},
    },
    "table8": {
        "poisson": {"fitted": [528917.3, 36734.96, 1275.679, 29.53329, 0.5127949],
                    "nll": 146704.8, "chi_sq": 3919.575},
        "negbin": {"fitted": [529526.7, 35556.89, 1790.692, 80.16146, 3.364198],
                   "nll": 146051.2, "chi_sq": 826.9477},
        # the x=4 entry repeats the x=3 value in print and is not compared
        "ndoppe": {"fitted": [529832.4, 34956.52, 2050.054, 112.713, None],
                   "nll": 145879.5, "chi_sq": 348.6467},
    },
}

# Relative tolerances used when grading a reproduction.
TOLERANCES = {
    "ndoppe": {"fitted": 2e-3, "small_abs": 0.5, "nll": 5e-4, "chi_sq": 1e-2},
    "poisson": {"fitted": 1e-3, "small_abs": 0.5, "nll": 1e-3, "chi_sq": 1e-2},
    "negbin": {"fitted": 5e-3, "small_abs": 0.5, "nll": 5e-3, "chi_sq": 5e-2},
}
RELAXED_TABLES = {"table8": 2e-2}

# Printed columns that are not maximum-likelihood fits, with the parameters
# that reproduce them. The MLE of these cells has a lower NLL than printed.
#   table2 ndoppe: theta back-solved from the x=0 cell
#   table6 poisson: alpha back-solved from the x=0 cell; xbar is 0.1442198
#   table3/4/7 negbin: r fixed at 2 with p = xbar / (2 + xbar)
PUBLISHED_PARAMS: Dict[Tuple[str, str], Dict[str, float]] = {
    ("table2", "ndoppe"): {"theta": 0.9621874843290904},
    ("table6", "poisson"): {"alpha": 0.1443749016},
    ("table3", "negbin"): {"r": 2.0, "p": 0.09680190931},
    ("table4", "negbin"): {"r": 2.0, "p": 0.04145698538},
    ("table7", "negbin"): {"r": 2.0, "p": 0.08396998366},
}


def tolerance_for(name: str, model: str) -> Dict[str, float]:
    """Grading tolerances of one model, widened for relaxed tables."""
    tol = dict(TOLERANCES[model])
    relaxed = RELAXED_TABLES.get(name)
    if relaxed is not None:
        for key in ("fitted", "nll", "chi_sq"):
            tol[key] = max(tol[key], relaxed)
    return tol


def parse_dataset(lines: Iterable[str], name: str = "") -> CountDataset:
    """
    Parse `count,frequency` CSV text. Blank lines and lines starting with '#'
    are skipped; the first remaining line must be the header.
    """
    header_seen = False
    cells = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            fields = [f.strip().lower() for f in line.split(",")]
            if fields != ["count", "frequency"]:
                raise DatasetParseError(f"expected header 'count,frequency', got {line!r}", line=lineno)
            header_seen = True
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 2:
            raise DatasetParseError(f"expected two fields, got {len(fields)}", line=lineno)
        try:
            x, freq = int(fields[0]), int(fields[1])
        except ValueError:
            raise DatasetParseError(f"count and frequency must be integers, got {line!r}", line=lineno)
        if x < 0:
            raise DatasetParseError(f"count values must be nonnegative, got {x}", line=lineno)
        cells.append((x, freq))
    if not header_seen:
        raise EmptyDatasetError("dataset file has no header line")
    return CountDataset(name=name, cells=check_cells(cells))


def load_fixture(name: str) -> CountDataset:
    if name not in FIXTURE_NAMES:
        raise ParameterError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")
    with open(DATA_DIR / f"{name}.csv", encoding="utf-8") as fh:
        return parse_dataset(fh, name=name)


def reference(name: str, model: str) -> Optional[dict]:
    return REFERENCE.get(name, {}).get(model)
