"""Classical mode algebra of the free boson.

Densities are differential polynomials in position and momentum on the
circle; brackets are computed against the canonical table and reduced
modulo total sigma-derivatives, so every answer is an equivalence class
of Fourier-mode functionals.  The script prints the classical
Heisenberg and Witt relations, the energy grading, and the induced
Hamiltonian flow, all with exact Gaussian-rational coefficients.
"""

from chiraltorus import (
    ExactScalar,
    boson_table,
    density_bracket,
    dz_density,
    fourier_bracket,
    from_tau_jets,
    generator_density,
    hamiltonian_flow,
    mode_structure_constants,
    parse_expr,
)

S = ExactScalar
I = S(0, 1)
LINE = "-" * 64
TABLE = boson_table()
P = parse_expr


def heis(mode, sign="+"):
    return generator_density("heis" + sign, mode)


def vir(mode, sign="+"):
    return generator_density("vir" + sign, mode)


def main():
    print(LINE)
    print("chiral current modes (classical Heisenberg relations)")
    print(LINE)
    for m, n in ((2, -2), (3, -3), (1, 2)):
        out = fourier_bracket(heis(m), heis(n), TABLE)
        print(f"  {{a_{m}, a_{n}}} = {out}")
    print()

    print(LINE)
    print("stress modes (classical Witt relations, no central term)")
    print(LINE)
    for m, n in ((2, -1), (2, -2), (1, 1)):
        out = fourier_bracket(vir(m), vir(n), TABLE)
        print(f"  {{L_{m}, L_{n}}} = {out}")
    print("  classical check: {L_2, L_-2} has no constant part, the")
    print("  central extension only appears after quantization")
    print()

    print(LINE)
    print("the stress action on currents and the energy grading")
    print(LINE)
    for m, n in ((2, 1), (1, -3)):
        out = fourier_bracket(vir(m), heis(n), TABLE)
        print(f"  {{L_{m}, a_{n}}} = {out}")
    H = generator_density("hamiltonian")
    for n in (1, 2, -3):
        out = fourier_bracket(H, heis(n), TABLE)
        print(f"  {{H, a_{n}}} = {out}   (eigenvalue {-n})")
    print()

    print(LINE)
    print("structure constants for a mode pair, both chiralities")
    print(LINE)
    rows = mode_structure_constants(("heis+", "heis-", "vir+", "vir-"), 2, -2)
    for key, val in sorted(rows.items()):
        print(f"  {key}: {val}")
    print()

    print(LINE)
    print("opposite chiralities commute")
    print(LINE)
    print("  {a_2, abar_-2} =", fourier_bracket(heis(2), heis(-2, "-"), TABLE))
    print("  {L_1, abar_2}  =", fourier_bracket(vir(1), heis(2, "-"), TABLE))
    print()

    print(LINE)
    print("delta-distribution level: the current self-bracket")
    print(LINE)
    a = dz_density(1).scale(I)
    print("  {i dz x, i dz x} =", density_bracket(a, a, TABLE))
    print("  (coefficient of delta' is the half inverse metric)")
    print()

    print(LINE)
    print("Hamiltonian flow reproduces the wave equation")
    print(LINE)
    flow = hamiltonian_flow(H, P("x1"), TABLE)
    print("  {H, x} =", flow)
    velocity = from_tau_jets(P("dt.x1"))
    print("  {H, {H, x}} =", hamiltonian_flow(H, velocity, TABLE))
    print("  so d^2/dtau^2 x = d^2/dsigma^2 x on classes")


if __name__ == "__main__":
    main()
