"""Noether currents of the free boson, worked in exact arithmetic.

Starts from the sigma-model Lagrangian on a cylinder, derives the
equation of motion and the variational 1-form, then prints the
conserved currents attached to time translation, space translation,
target translation, and the two chiral families of conformal
reparametrizations.  Everything is a differential polynomial in the
jet variables; no floating point appears anywhere.
"""

from chiraltorus import (
    boson_circle_lagrangian,
    euler_lagrange,
    gen_conformal,
    gen_sigma,
    gen_tau,
    gen_translation,
    noether,
    poly_str,
    restrict_to_sol0,
    torus_lagrangian,
    variational_one_form,
)

LINE = "-" * 64


def show_current(label, current):
    print(label)
    print("  tau component  :", poly_str(current.component((), ("t",))))
    print("  sigma component:", poly_str(current.component((), ("s",))))
    print()


def main():
    print(LINE)
    print("one free boson on the cylinder")
    print(LINE)
    L = boson_circle_lagrangian()
    print("L =", poly_str(L.density))
    print("equation of motion:", poly_str(euler_lagrange(L)[0]), "= 0")
    print()

    gamma = variational_one_form(L)
    print("variational 1-form, coefficient of delta x^1:")
    print("  ... wedge d sigma:", poly_str(gamma.component(((1, 0, 0),), ("s",))))
    print("  ... wedge d tau  :", poly_str(gamma.component(((1, 0, 0),), ("t",))))
    print()

    show_current("energy current (tau translation):", noether(L, gen_tau(1)))
    show_current("momentum current (sigma translation):", noether(L, gen_sigma(1)))
    show_current("target translation current:", noether(L, gen_translation(1, 1)))
    show_current("holomorphic conformal current, profile f:",
                 noether(L, gen_conformal(1)))
    show_current("antiholomorphic conformal current, profile g:",
                 noether(L, gen_conformal(1, holomorphic=False)))

    print(LINE)
    print("the energy splits into chiral halves")
    print(LINE)
    H = noether(L, gen_tau(1))
    Hz = noether(L, gen_conformal(1, with_symbol=False))
    Hzb = noether(L, gen_conformal(1, holomorphic=False, with_symbol=False))
    print("H == H_z + H_zbar exactly:", H == Hz + Hzb)
    print("and after restriction to the solution slice:",
          restrict_to_sol0(H) == restrict_to_sol0(Hz) + restrict_to_sol0(Hzb))
    print()

    print(LINE)
    print("two bosons with a constant B-field")
    print(LINE)
    g = [[1, 0], [0, 2]]
    b = [[0, 3], [-3, 0]]
    LB = torus_lagrangian(g, b)
    print("L =", poly_str(LB.density))
    print()
    show_current("translation current of x^1 (keeps the B-term):",
                 noether(LB, gen_translation(2, 1)))
    # the B contribution to the action is topological, so the energy
    # current cannot see it
    HB = noether(LB, gen_tau(2))
    H0 = noether(torus_lagrangian(g), gen_tau(2))
    show_current("energy current with B:", HB)
    print("identical to the B = 0 energy current:", HB == H0)


if __name__ == "__main__":
    main()
