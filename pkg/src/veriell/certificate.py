"""Certificate serialization and report artifacts.

Certificates are the auditable record of a proof attempt: every number is
stored as a pair of hexadecimal float endpoints (bit-exact round trip) with
a decimal rendering alongside.  Writers are deterministic so identical runs
produce byte-identical artifacts.
"""
from __future__ import annotations

import csv
import json
from typing import Optional

import numpy as np

from .interval import Interval
from .legendre import SpectralFn
from .verify import VerificationCertificate


def _iv_json(iv: Optional[Interval]):
    if iv is None:
        return None
    return {"hex": list(iv.to_hex()), "dec": [repr(iv.lo), repr(iv.hi)]}


def certificate_to_json(cert: VerificationCertificate) -> dict:
    out = {
        "schema": "veriell-certificate/1",
        "method": cert.method,
        "variant": cert.variant,
        "status": cert.status,
        "problem": cert.problem,
        "rho": _iv_json(cert.rho),
        "alpha": _iv_json(cert.alpha),
        "sup_Wh": _iv_json(cert.sup_wh),
        "beta": _iv_json(cert.beta),
        "omega": _iv_json(cert.omega),
        "uniqueness_radius": _iv_json(cert.uniqueness_radius),
        "contraction": _iv_json(cert.contraction),
        "bounds": cert.bounds,
        "constants": cert.constants,
        "iterations": cert.iterations,
        "notes": cert.notes,
        "config": cert.config,
        "rounding": "nextafter-nudging",
    }
    if cert.wh is not None:
        out["Wh"] = cert.wh.to_json_obj()["coeffs"]
    if cert.uhat is not None:
        out["uhat"] = cert.uhat.to_json_obj()["coeffs"]
    return out


def write_certificate(cert: VerificationCertificate, path) -> None:
    with open(path, "w") as fh:
        json.dump(certificate_to_json(cert), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_certificate_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_wh_csv(cert: VerificationCertificate, path) -> None:
    """Candidate-box coefficients in the (i, j, enclosure) table layout."""
    if cert.wh is None:
        raise ValueError("certificate carries no candidate box")
    uhat = cert.uhat
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "uhat_lo_hex", "uhat_hi_hex",
                    "W_lo_hex", "W_hi_hex", "W_lo", "W_hi"])
        n = cert.wh.n
        for i in range(n):
            for j in range(n):
                box = cert.wh.coeffs
                row = [i + 1, j + 1]
                if uhat is not None:
                    row += [float(uhat.coeffs.lo[i, j]).hex(),
                            float(uhat.coeffs.hi[i, j]).hex()]
                else:
                    row += ["", ""]
                row += [float(box.lo[i, j]).hex(), float(box.hi[i, j]).hex(),
                        repr(float(box.lo[i, j])), repr(float(box.hi[i, j]))]
                w.writerow(row)


def write_summary(certs: list[VerificationCertificate], path) -> None:
    """Per-method norm results in the comparison-table layout."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "status", "sup_Wh", "alpha", "rho"])
        for cert in certs:
            w.writerow([
                cert.method, cert.status,
                repr(cert.sup_wh.hi) if cert.sup_wh else "",
                repr(cert.alpha.hi) if cert.alpha else "",
                repr(cert.rho.hi) if cert.rho else "",
            ])


def write_grid_csv(uhat: SpectralFn, path, grid: int = 101) -> None:
    """Midpoint samples of the approximate solution on a uniform plot grid."""
    n = uhat.n
    xs = np.linspace(0.0, 1.0, grid)
    p = np.zeros((n + 2, grid))
    p[0] = 1.0
    if n + 1 >= 1:
        p[1] = 2.0 * xs - 1.0
    for k in range(1, n + 1):
        p[k + 1] = ((2 * k + 1) * (2 * xs - 1) * p[k] - k * p[k - 1]) / (k + 1)
    emat = np.zeros((n, n + 2))
    for i in range(1, n + 1):
        emat[i - 1, i - 1] = 1.0 / (2 * (2 * i + 1))
        emat[i - 1, i + 1] = -1.0 / (2 * (2 * i + 1))
    psi = emat @ p  # (n, grid)
    vals = psi.T @ uhat.coeffs.mid() @ psi
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "u"])
        for a in range(grid):
            for b in range(grid):
                w.writerow([repr(float(xs[a])), repr(float(xs[b])),
                            repr(float(vals[a, b]))])
