import numpy as np


def correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation clipped to [-1, 1]; 0.0 when either stream is constant."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ac = a - a.mean()
    bc = b - b.mean()
    denom = np.sqrt(float(ac @ ac) * float(bc @ bc))
    if denom == 0.0:
        return 0.0
    return float(np.clip(float(ac @ bc) / denom, -1.0, 1.0))
