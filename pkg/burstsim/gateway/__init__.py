from .models import (
    GatewayError,
    BadRequest,
    NotFound,
    Conflict,
    ExecutionSystem,
    StorageSystem,
    AppRegistration,
    GatewayJob,
    GatewayStatus,
)
from .service import GatewayService
from .app import create_app, SIM_TIME_HEADER
