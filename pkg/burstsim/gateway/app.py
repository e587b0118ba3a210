from typing import *

from flask import Blueprint, Flask, current_app, jsonify, request
from werkzeug.exceptions import HTTPException

from burstsim.gateway.models import BadRequest, GatewayError
from burstsim.gateway.service import GatewayService
from burstsim.utils.logging import logger

SIM_TIME_HEADER = "X-Sim-Time"

api = Blueprint("api", __name__, url_prefix="/v1")


def _service() -> GatewayService:
    return current_app.config["GATEWAY_SERVICE"]


def _body() -> Mapping:
    body = request.get_json(silent=True)
    if not isinstance(body, dict):
        raise BadRequest("request body must be a JSON object")
    return body


def _sim_time() -> Optional[int]:
    value = request.headers.get(SIM_TIME_HEADER)
    if value is None:
        return None
    try:
        sim_time = int(value)
    except ValueError:
        raise BadRequest("{} must be an integer, got {!r}".format(SIM_TIME_HEADER, value))
    if sim_time < 0:
        raise BadRequest("{} must be >= 0".format(SIM_TIME_HEADER))
    return sim_time


@api.route("/systems", methods=["POST"])
def create_system():
    return jsonify(_service().register_system(_body())), 201


@api.route("/systems", methods=["GET"])
def list_systems():
    return jsonify(_service().list_systems()), 200


@api.route("/apps", methods=["POST"])
def create_app_registration():
    return jsonify(_service().register_app(_body())), 201


@api.route("/apps", methods=["GET"])
def list_apps():
    return jsonify(_service().list_apps()), 200


@api.route("/jobs", methods=["POST"])
def submit_job():
    return jsonify(_service().submit_job(_body(), sim_time=_sim_time())), 201


@api.route("/jobs", methods=["GET"])
def list_jobs():
    return jsonify(_service().list_jobs(sim_time=_sim_time())), 200


@api.route("/jobs/<job_id>", methods=["GET"])
def get_job(job_id):
    return jsonify(_service().get_job(job_id, sim_time=_sim_time())), 200


@api.route("/jobs/<job_id>/cancel", methods=["POST"])
def cancel_job(job_id):
    return jsonify(_service().cancel_job(job_id, sim_time=_sim_time())), 200


def create_app(service: GatewayService) -> Flask:
    r"""Flask application serving ``service`` under ``/v1``. Errors are JSON
    ``{"error": message, "code": status}``."""
    app = Flask("burstsim.gateway")
    app.config["GATEWAY_SERVICE"] = service
    app.json.sort_keys = False
    app.register_blueprint(api)

    @app.errorhandler(GatewayError)
    def handle_gateway_error(error: GatewayError):
        return jsonify(error.to_dict()), error.code

    @app.errorhandler(HTTPException)
    def handle_http_error(error: HTTPException):
        return jsonify({"error": error.description, "code": error.code}), error.code

    logger.debug("gateway app created")
    return app
