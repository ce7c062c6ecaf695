import logging

from flask import Blueprint, jsonify, request, send_file, Response
from decomposer.decomposer_utilities import DecomposerUtilities
from models import ToneParams
from oracle_bench.oracle_bench_service import OracleBenchService
from oracle_bench.oracle_bench_utilities import OracleBenchUtilities

logger = logging.getLogger(__name__)

bench_bp = Blueprint("bench_api", __name__)
bench_service = OracleBenchService()
bench_utils = OracleBenchUtilities()
decomposer_utils = DecomposerUtilities()

MAX_TRIALS = 1000


def _truth_from_request(raw):
    if not isinstance(raw, list) or not raw:
        raise ValueError("'truth' must be a non-empty list of tones.")
    tones = []
    for t in raw:
        if not isinstance(t, dict):
            raise ValueError("Each tone needs 'frequency' and 'amplitude' (and optional 'phase').")
        tones.append(ToneParams(float(t["frequency"]), float(t["amplitude"]), float(t.get("phase", 0.0))))
    return tones


@bench_bp.route("/bench/monte-carlo", methods=["POST"])
def run_monte_carlo():
    fmt = (request.args.get("fmt") or "json").lower()    # json|csv|xlsx
    if fmt not in {"json", "csv", "xlsx"}:
        return jsonify({"error": "fmt must be 'json', 'csv' or 'xlsx'"}), 400

    data = request.get_json(silent=True) or {}
    try:
        truth = _truth_from_request(data.get("truth"))
        n_samples = int(data.get("n_samples", 1024))
        trials = int(data.get("trials", 10))
        if not 1 <= trials <= MAX_TRIALS:
            raise ValueError(f"trials must lie in 1..{MAX_TRIALS}.")
        snr_db = float(data.get("snr_db", "inf"))
        base_seed = int(data.get("seed", 0))
        cfg = decomposer_utils.config_from_request(data)
        report = bench_service.monte_carlo(truth, n_samples, snr_db, trials, cfg, base_seed=base_seed)
    except (KeyError, TypeError, ValueError) as e:
        logger.exception("Rejected Monte Carlo request")
        return jsonify({"error": str(e)}), 400
    except Exception:
        logger.exception("Error running Monte Carlo")
        return jsonify({"error": "Internal server error"}), 500

    filename_base = f"montecarlo_N{n_samples}_trials{trials}"
    if fmt == "json":
        return jsonify(bench_utils.report_to_dict(report, cfg))

    if fmt == "csv":
        headers = {
            "Content-Disposition": f'attachment; filename="{filename_base}.csv"',
            "Content-Type": "text/csv; charset=utf-8",
        }
        return Response(bench_utils.report_csv(report), headers=headers)

    return send_file(
        bench_utils.report_xlsx(report),
        as_attachment=True,
        download_name=f"{filename_base}.xlsx",
        mimetype="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
    )
