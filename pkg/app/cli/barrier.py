"""
barrier: the planar wiping barrier u = y^alpha phi(e^x y^beta)
"""


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("barrier", parents=[common], help="two-dimensional zero-boundary barrier")
    parser.add_argument("--p", type=float, help="exponent in (0, 1/2)")
    parser.add_argument("--beta", type=float, help="negative shape constant")
    parser.add_argument("--q", type=float, help="band exponent in ((p+1)/3, 1)")
    parser.add_argument("--delta", type=float, help="seeded interval (0, delta]")
    parser.add_argument("--r1", type=float, help="radius at which phi = phi1")
    parser.add_argument("--phi-max", dest="phi_max", type=float, help="end of the continuation")
