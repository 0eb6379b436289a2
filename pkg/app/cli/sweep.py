"""
sweep: one swept parameter fanned out as concurrent runs
"""


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("sweep", parents=[common], help="concurrent parameter sweep")
    parser.add_argument("sweep_command", choices=["entire", "large", "barrier"], help="command to sweep")
    parser.add_argument("--a0-list", dest="a0_list", help="comma-separated central values")
    parser.add_argument("--p-list", dest="p_list", help="comma-separated exponents")
    parser.add_argument("--beta-list", dest="beta_list", help="comma-separated barrier constants")
    parser.add_argument("--n", type=int, help="dimension")
    parser.add_argument("--p", type=float, help="exponent when not swept")
    parser.add_argument("--A", type=float, help="coefficient of u^p")
    parser.add_argument("--a0", type=float, help="central value when not swept")
    parser.add_argument("--r-max", dest="r_max", type=float, help="outer radius")
    parser.add_argument("--R", nargs="+", type=float, help="ball radii for large sweeps")
    parser.add_argument("--beta", type=float, help="barrier constant when not swept")
    parser.add_argument("--phi-max", dest="phi_max", type=float, help="barrier continuation end")
