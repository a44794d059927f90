# genop/views.py
import hashlib
import json
import logging

from django.core.cache import cache
from django.http import JsonResponse
from django.views.decorators.csrf import csrf_exempt

from .commands import EXIT_DOMAIN, EXIT_OK, EXIT_PARSE, parse_command, run
from .exceptions import ParseError
from .serialization import ReportEncoder

logger = logging.getLogger(__name__)

# --- Constants ---
CACHE_PREFIX = "genop:report:"
CACHE_TIMEOUT = 60 * 60
STATUS = {EXIT_OK: 200, EXIT_DOMAIN: 422, EXIT_PARSE: 400}


def _command_source(request):
    """
    The command of a request: ``?command=...`` on GET, a JSON body on POST
    holding either {"command": "..."} or {"verb", "subcommand", "flags"}.
    """
    if request.method == "GET":
        text = request.GET.get("command", "").strip()
        if not text:
            raise ParseError("missing 'command' parameter", field="command")
        return text
    try:
        data = json.loads(request.body.decode("utf-8") or "null")
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", position=e.pos) from e
    except UnicodeDecodeError as e:
        raise ParseError("request body is not UTF-8", position=e.start) from e
    if isinstance(data, dict) and isinstance(data.get("command"), str):
        return data["command"]
    if isinstance(data, dict):
        return data
    raise ParseError("body must be a JSON object", field="command")


def _respond(data, exit_code):
    return JsonResponse(data, status=STATUS[exit_code], encoder=ReportEncoder,
                        json_dumps_params={"sort_keys": True})


@csrf_exempt
def run_api(request):
    """
    Runs one genop command and returns its report as JSON.

    Reports are cached by the canonical command text, so equivalent
    spellings of a command share one entry.
    """
    if request.method not in ("GET", "POST"):
        return JsonResponse({"error": "GET or POST required"}, status=405)

    try:
        command = parse_command(_command_source(request))
    except ParseError as e:
        logger.info("rejected API command: %s", e.message)
        return _respond({"command": None, "exit_code": EXIT_PARSE, "exact": None,
                         "results": None, "error": e.as_dict()}, EXIT_PARSE)

    key = CACHE_PREFIX + hashlib.sha256(command.text.encode("utf-8")).hexdigest()
    data = cache.get(key)
    if data is None:
        try:
            report = run(command)
        except Exception as e:
            logger.exception("command %s crashed", command.text)
            return JsonResponse({"error": str(e)}, status=500)
        data = report.as_dict()
        if report.ok:
            cache.set(key, data, CACHE_TIMEOUT)
    return _respond(data, data["exit_code"])
