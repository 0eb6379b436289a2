"""
entire: series seed plus continuation of an entire solution (p < n)
"""


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("entire", parents=[common], help="entire radial solution for p < n")
    parser.add_argument("--n", type=int, help="dimension")
    parser.add_argument("--p", type=float, help="exponent, p < n")
    parser.add_argument("--A", type=float, help="coefficient of u^p")
    parser.add_argument("--a0", type=float, help="central value u(0)")
    parser.add_argument("--r-max", dest="r_max", type=float, help="outer radius")
    parser.add_argument("--kappa", type=int, help="series half-order")
