import math
from functools import wraps

from aws_lambda_powertools import Logger
from chalice import BadRequestError, Chalice, Response
from chalice.app import ConvertToMiddleware

from chalicelib.modules.container import container
from chalicelib.modules.errors import (
    AnsatzConstructionError, EigensolverError, InvalidParameterError, VerificationError)
from chalicelib.services.hermite_basis import MIN_BLOCK

app = Chalice(app_name='hypocoercivity-certificates')
logger = Logger()

app.register_middleware(ConvertToMiddleware(logger.inject_lambda_context))

TWO_PI = 2 * math.pi


@app.middleware('http')
def inject_route_info(event, get_response):
    logger.structure_logs(append=True, request_path=event.path)
    return get_response(event)


def request_body() -> dict:
    body = app.current_request.json_body
    if body is not None and not isinstance(body, dict):
        raise BadRequestError("Expected a JSON object.")
    return body or {}


def dimension(body: dict) -> int:
    dim = body.get("dim", 1)
    if dim not in MIN_BLOCK:
        raise BadRequestError(f"dim must be 1, 2 or 3, got {dim}.")
    return dim


def torus_length(body: dict) -> float:
    length = body.get("L", TWO_PI)
    if not isinstance(length, (int, float)) or length <= 0:
        raise BadRequestError(f"L must be a positive number, got {length}.")
    return float(length)


def handle_errors(route):
    @wraps(route)
    def wrapper(*args, **kwargs):
        try:
            return route(*args, **kwargs)
        except (InvalidParameterError, AnsatzConstructionError, EigensolverError) as error:
            logger.info(f"Rejected request: {error}")
            raise BadRequestError(str(error))
        except VerificationError as error:
            logger.warning(f"Verification failed: {error}")
            return Response(body={"error": str(error), "kappa": error.kappa, "min_eig": error.min_eig},
                            status_code=422)
    return wrapper


@app.route('/index', methods=['POST'], cors=True)
@handle_errors
def index() -> Response:
    body = request_body()
    dim = dimension(body)
    pair = container.operator_assembly().operator_pair(
        dim, body.get("basis", "tensor"), body.get("trunc", 4 * MIN_BLOCK[dim]), torus_length(body),
        body.get("relaxation", "bgk"))
    report = container.hypo_index().hypocoercivity_index(
        body.get("kappa", 1.0) * pair.ell * pair.L1, pair.L2, tol=body.get("tol_rank"))
    return Response(body=report.to_dict(), status_code=200)


@app.route('/certificate', methods=['POST'], cors=True)
@handle_errors
def certificate() -> Response:
    body = request_body()
    result = container.decay_certifier().certify(dimension(body), torus_length(body))
    logger.info(f"Certificate requested for d={result.d}, L={result.L}: mu={result.mu}")
    if not result.valid:
        worst = min(value for _, value in result.verification)
        raise VerificationError(kappa=result.offending_kappa, min_eig=worst)
    return Response(body=result.to_dict(), status_code=200)


@app.route('/spectrum', methods=['POST'], cors=True)
@handle_errors
def spectrum() -> Response:
    body = request_body()
    dim = dimension(body)
    report = container.spectral_gap().spectral_gap(
        dim, torus_length(body), body.get("kappas", [1.0]), body.get("trunc", 4 * MIN_BLOCK[dim]))
    return Response(body=report.to_dict(), status_code=200)


@app.route('/minors', methods=['POST'], cors=True)
@handle_errors
def minors() -> Response:
    body = request_body()
    table = container.decay_certifier().minor_table(
        dimension(body), body.get("kappa", 1.0), body.get("alpha", 0.1), TWO_PI / torus_length(body))
    return Response(body=table.to_dict(), status_code=200)
