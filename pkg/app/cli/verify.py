"""
verify: exact-solution oracle and series checks for one dimension
"""


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("verify", parents=[common], help="exact oracle and series lattice for n")
    parser.add_argument("--n", type=int, help="dimension")
