"""
The ideal point and the entropy oracle
======================================

A noiseless two-bin source should give one secret bit per coincidence.
The SDP bound is compared with the direct eigendecomposition oracle,
first at the ideal point and then for a noisy isotropic state.
"""

import numpy as np

from hdqkd.entropy import (
    assemble_sdp,
    direct_entropy_oracle,
    gauss_radau,
    solve_entropy_bound,
)
from hdqkd.linalg import basis_ket, projector
from hdqkd.model import Protocol, isotropic_time_state
from hdqkd.povm import constraints_from_state, protocol_povms

d = 2
povms = protocol_povms(Protocol.P1, d)
print("settings:", ", ".join(f"{p.setting} ({len(p)} elements)" for p in povms))

# The measured statistics of rho(v) become equality constraints on sigma.
for v in (1.0, 0.95, 0.9):
    rho = isotropic_time_state(v, d)
    problem = assemble_sdp(constraints_from_state(povms, rho), d, gauss_radau(10))
    sol = solve_entropy_bound(problem)
    print(f"v = {v:4.2f}: SDP bound {sol.objective_bits:.6f} bits, "
          f"oracle {direct_entropy_oracle(rho, d):.6f} bits ({sol.status.value})")

# With tomographically complete constraints Eve learns nothing beyond rho,
# so the bound closes in on the oracle as m grows.
n = d * d
kets = [basis_ket(n, k) for k in range(n)]
for k in range(n):
    for j in range(k + 1, n):
        kets += [(basis_ket(n, k) + basis_ket(n, j)) / np.sqrt(2),
                 (basis_ket(n, k) + 1j * basis_ket(n, j)) / np.sqrt(2)]
rho = isotropic_time_state(0.9, d)
tomo = [(projector(k), float(np.vdot(k, rho @ k).real)) for k in kets]
print(f"\ntomography, v = 0.9, oracle {direct_entropy_oracle(rho, d):.6f}")
for m in (2, 4, 6, 8, 10):
    sol = solve_entropy_bound(assemble_sdp(tomo, d, gauss_radau(m)))
    print(f"  m = {m:2d}: {sol.objective_bits:.6f}")
