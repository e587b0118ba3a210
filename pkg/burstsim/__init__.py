__version__ = "0.1.0"

from .errors import *
from .config import load_scenario, get_user_config
from .simulation import Simulation
