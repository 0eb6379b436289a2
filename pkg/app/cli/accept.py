"""
accept: the full acceptance suite
"""


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("accept", parents=[common], help="run the acceptance suite")
    parser.add_argument("--criteria", help="comma-separated criterion numbers, all when omitted")
