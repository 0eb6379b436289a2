"""
large: large solutions on balls for p > n, the borderline demo for p = n
"""


def register(subparsers, common) -> None:
    parser = subparsers.add_parser(
        "large", parents=[common], help="large solutions on balls (p > n) or the p = n borderline run"
    )
    parser.add_argument("--n", type=int, help="dimension")
    parser.add_argument("--p", type=float, help="exponent, p >= n")
    parser.add_argument("--A", type=float, help="coefficient of u^p")
    parser.add_argument("--R", nargs="+", type=float, help="ball radii, increasing")
    parser.add_argument("--a0", type=float, help="central value for scaling and borderline runs")
    parser.add_argument("--r-max", dest="r_max", type=float, help="outer radius of the borderline run")
