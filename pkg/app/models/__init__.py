from .problem import *
from .profiles import *
from .reports import *
from .run_config import *
