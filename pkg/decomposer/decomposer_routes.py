import logging

from flask import Blueprint, request, jsonify
from decomposer.decomposer_service import DecomposerService
from decomposer.decomposer_utilities import DecomposerUtilities
from runs.runs_service import RunsService

logger = logging.getLogger(__name__)

decomposer_bp = Blueprint("decomposer_bp", __name__)
decomposer_service = DecomposerService()
decomposer_utils = DecomposerUtilities()
runs_service = RunsService()


@decomposer_bp.route('/decompositions', methods=['POST'])
def create_decomposition():
    data = request.get_json(silent=True)
    if not data or 'samples' not in data:
        return jsonify(error="Missing 'samples'"), 400

    sample_rate = data.get("sample_rate")
    store = data.get("store", True)
    if not isinstance(store, bool):
        return jsonify(error="'store' must be a JSON boolean"), 400
    try:
        if sample_rate is not None:
            sample_rate = float(sample_rate)
            if not sample_rate > 0:
                raise ValueError("sample_rate must be positive.")
        x = decomposer_utils.signal_from_samples(data["samples"])
        cfg = decomposer_utils.config_from_request(data)
        result = decomposer_service.decompose(x, cfg)
    except (ValueError, TypeError) as e:
        logger.exception("Rejected decomposition request")
        return jsonify(error=str(e)), 400
    except Exception:
        logger.exception("Error running decomposition")
        return jsonify(error="Internal server error"), 500

    document = decomposer_utils.result_to_document(result, cfg, sample_rate=sample_rate, source=data.get("source"))
    if store:
        try:
            saved = runs_service.save_run(result, cfg, sample_rate=sample_rate, source=data.get("source"))
            document["id"] = saved["id"]
        except Exception:
            logger.exception("Error storing decomposition run")
            return jsonify(error="Internal server error"), 500
    return jsonify(document), 201 if store else 200


@decomposer_bp.route('/decompositions', methods=['GET'])
def get_decompositions():
    return jsonify(runs_service.get_all_runs())


@decomposer_bp.route('/decompositions/<int:run_id>', methods=['GET'])
def get_decomposition(run_id):
    run = runs_service.get_run(run_id)
    if run is None:
        return jsonify(error="Decomposition not found"), 404
    return jsonify(run)


@decomposer_bp.route('/decompositions/<int:run_id>', methods=['DELETE'])
def delete_decomposition(run_id):
    try:
        deleted = runs_service.delete_run(run_id)
        if not deleted:
            return jsonify(error="Decomposition not found"), 404
        return "", 204
    except Exception:
        logger.exception("Error deleting decomposition %s", run_id)
        return jsonify(error="Internal server error"), 500
