# genop/management/commands/genop.py
import logging

from django.core.management.base import BaseCommand, CommandError

from genop.commands import EXIT_PARSE, FLAG_TYPES, exit_code, parse_batch, run, run_batch, summary
from genop.exceptions import ParseError
from genop.serialization import dumps

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = (
        "Runs a genop command, e.g. `genop indexing check --group cyclic-2 --arity 3`, "
        "or a JSON batch with --batch. JSON goes to stdout, summaries to stderr."
    )

    def add_arguments(self, parser):
        parser.add_argument("verb", nargs="?", help="group, family, tree, gtree, operad, indexing, extension or ninfty")
        parser.add_argument("subcommand", nargs="?")
        for name, kind in FLAG_TYPES.items():
            if kind is bool:
                parser.add_argument(f"--{name}", action="store_true", default=None)
            else:
                parser.add_argument(f"--{name}", type=kind)
        parser.add_argument("--batch", help="Path of a JSON array of commands.")
        parser.add_argument("--threads", type=int, help="Worker threads for a batch.")
        parser.add_argument("--timings", action="store_true", help="Include wall-clock timings.")

    def handle(self, *args, **options):
        if options["batch"]:
            reports = run_batch(self._read_batch(options["batch"]), options["threads"])
        elif options["verb"] and options["subcommand"]:
            flags = {name: options[name.replace("-", "_")] for name in FLAG_TYPES
                     if options.get(name.replace("-", "_")) is not None}
            reports = [run({"verb": options["verb"], "subcommand": options["subcommand"], "flags": flags})]
        else:
            raise CommandError("give a verb and a subcommand, or --batch", returncode=EXIT_PARSE)

        data = [report.as_dict(options["timings"]) for report in reports]
        self.stdout.write(dumps(data[0] if not options["batch"] else data))
        for report in reports:
            line = summary(report)
            self.stderr.write(line, style_func=self.style.SUCCESS if report.ok else self.style.ERROR)
        code = exit_code(reports)
        if code:
            failed = sum(1 for report in reports if not report.ok)
            raise CommandError(f"{failed} of {len(reports)} commands failed", returncode=code)

    def _read_batch(self, path):
        try:
            with open(path, encoding="utf-8") as handle:
                return parse_batch(handle.read())
        except OSError as exc:
            raise CommandError(f"cannot read {path}: {exc.strerror}", returncode=EXIT_PARSE) from exc
        except ParseError as exc:
            logger.error("batch %s: %s at %s", path, exc.message, exc.position)
            raise CommandError(f"{path}: {exc.message} (position {exc.position})", returncode=EXIT_PARSE) from exc
