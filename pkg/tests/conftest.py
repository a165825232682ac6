import pytest

from dpdfg import build_dfg, parse_csv
from dpdfg.dfg import convert_unit

# Small clinic log: 11 cases over activities A-D, timestamps in decimal
# hours. Its DFG has frequencies (--,A):11 (A,B):5 (A,C):3 (A,D):1 (B,C):5
# (C,D):8 (D,--):9 (A,--):2 and duration lists
#   (A,B) [0.2, 3, 8, 12, 16]      (B,C) [1, 5, 11, 15, 20]
#   (A,C) [1, 6, 15]               (A,D) [7]
#   (C,D) [0.2, 0.25, 0.4, 1.5, 2.6, 3.65, 4.7, 6]
CLINIC_ROWS = [
    ("P1", "A", "1"), ("P1", "B", "1.2"), ("P1", "C", "2.2"), ("P1", "D", "2.4"),
    ("P2", "A", "5"), ("P2", "B", "8"), ("P2", "C", "13"), ("P2", "D", "13.25"),
    ("P3", "A", "7"), ("P3", "C", "8"), ("P3", "D", "8.4"),
    ("P4", "A", "20"), ("P4", "D", "27"),
    ("P5", "A", "30"),
    ("P6", "A", "40"), ("P6", "B", "48"), ("P6", "C", "59"), ("P6", "D", "60.5"),
    ("P7", "A", "70"), ("P7", "B", "82"), ("P7", "C", "97"), ("P7", "D", "99.6"),
    ("P8", "A", "110"), ("P8", "B", "126"), ("P8", "C", "146"), ("P8", "D", "149.65"),
    ("P9", "A", "160"), ("P9", "C", "166"), ("P9", "D", "170.7"),
    ("P10", "A", "180"), ("P10", "C", "195"), ("P10", "D", "201"),
    ("P11", "A", "210"),
]


def clinic_csv_text() -> str:
    lines = ["case,activity,timestamp"]
    lines += [",".join(row) for row in CLINIC_ROWS]
    return "\n".join(lines) + "\n"


@pytest.fixture(scope="session")
def clinic_csv() -> str:
    return clinic_csv_text()


@pytest.fixture(scope="session")
def clinic_log(clinic_csv):
    return parse_csv(clinic_csv)


@pytest.fixture(scope="session")
def clinic_dfg(clinic_log):
    return build_dfg(clinic_log)


@pytest.fixture(scope="session")
def clinic_dfg_hours(clinic_dfg):
    return convert_unit(clinic_dfg, "h")
