"""
Web interface for the sphere-sphere Casimir calculator
Small local Flask JSON API over the service layer
"""

from flask import Flask, jsonify, request
import asyncio
import logging
import os
import threading

from service import casimir_service

logging.basicConfig(level=os.getenv("CASIMIR_LOG_LEVEL", "INFO").upper())
logger = logging.getLogger(__name__)

app = Flask(__name__)

# Global event loop for async operations
loop = None

INDEX_PAGE = """<!DOCTYPE html>
<html lang="en">
<head><meta charset="UTF-8"><title>Sphere-sphere Casimir calculator</title></head>
<body style="font-family: sans-serif; max-width: 720px; margin: 2em auto;">
<h1>Sphere-sphere Casimir calculator</h1>
<p>POST JSON run configurations to <code>/api/deviation</code>, <code>/api/classical</code>, <code>/api/weights</code>
or slab parameters to <code>/api/pp</code>. <code>GET /api/tables</code> lists the
derivative-expansion coefficients, <code>GET /api/status</code> the defaults.</p>
<pre>curl -X POST localhost:5000/api/deviation -H 'Content-Type: application/json' \\
  -d '{"R1_um": 50, "R2_um": 50, "gap_um": 0.5, "prescription": "drude"}'</pre>
</body>
</html>
"""


def get_event_loop():
    """Get or create event loop for async operations"""
    global loop
    if loop is None:
        loop = asyncio.new_event_loop()
        threading.Thread(target=loop.run_forever, daemon=True).start()
    return loop


def run_async(coro):
    """Run async function in the event loop"""
    future = asyncio.run_coroutine_threadsafe(coro, get_event_loop())
    return future.result()


def _respond(result):
    if result.get("success"):
        return jsonify(result)
    status = 400 if result.get("error_type") == "input" else 500
    return jsonify(result), status


def _payload():
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        return None
    return data


@app.route('/')
def index():
    return INDEX_PAGE


@app.route('/api/pp', methods=['POST'])
def planar():
    data = _payload()
    if data is None:
        return jsonify({'success': False, 'error': 'JSON object body required'}), 400
    return _respond(run_async(casimir_service.planar(data)))


@app.route('/api/classical', methods=['POST'])
def classical():
    data = _payload()
    if data is None:
        return jsonify({'success': False, 'error': 'JSON object body required'}), 400
    return _respond(run_async(casimir_service.classical(data)))


@app.route('/api/deviation', methods=['POST'])
def deviation():
    """Full deviation from PFA at one separation"""
    data = _payload()
    if data is None:
        return jsonify({'success': False, 'error': 'JSON object body required'}), 400
    return _respond(run_async(casimir_service.deviation(data)))


@app.route('/api/weights', methods=['POST'])
def weights():
    data = _payload()
    if data is None:
        return jsonify({'success': False, 'error': 'JSON object body required'}), 400
    return _respond(run_async(casimir_service.weights(data)))


@app.route('/api/tables')
def tables():
    return jsonify(casimir_service.tables())


@app.route('/api/status')
def system_status():
    try:
        return jsonify(casimir_service.status())
    except Exception as e:
        logger.error(f"Status check failed: {e}")
        return jsonify({'success': False, 'error': str(e)}), 500


if __name__ == '__main__':
    print("🌐 Starting Casimir web API...")
    print("📱 Open http://localhost:5000 in your browser")
    app.run(debug=False, host='127.0.0.1', port=5000)
