import logging

from flask import Flask
from flask_cors import CORS

from constants import LOG_LEVEL

logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

app = Flask(__name__)
CORS(app)

from decomposer.decomposer_routes import decomposer_bp
app.register_blueprint(decomposer_bp)

from oracle_bench.oracle_bench_routes import bench_bp
app.register_blueprint(bench_bp)


if __name__ == '__main__':
    app.run(debug=True, port=5000)
