from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from factorization.exceptions import InputError
from factorization.problem import load_problem, with_overrides
from factorization.report import render_report, run_problem
from factorization.surface import render_diagram


class Command(BaseCommand):
    help = (
        "Classifies a matrix function G(k) with respect to commutative Wiener-Hopf "
        "factorization and writes the JSON report."
    )

    def add_arguments(self, parser):
        parser.add_argument("spec", help="TOML problem file")
        parser.add_argument("--tol", type=float)
        parser.add_argument("--samples", type=int)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--anchor", help="anchor point expression, e.g. 0.5 or 1+2i")
        parser.add_argument("--max-degree", type=int, dest="max_degree")
        parser.add_argument("--emit-diagram", dest="emit_diagram", metavar="PATH",
                            help="write the sheet diagram (.dot for Graphviz, otherwise text)")
        parser.add_argument("--json-out", dest="json_out", metavar="PATH",
                            help="write the report to a file instead of stdout")
        parser.add_argument("--timing", action="store_true", help="include stage timings in the report")

    def handle(self, *args, **options):
        """
        Завантажує задачу, застосовує прапорці, класифікує та записує звіт.

        :raises CommandError: returncode 2 для помилок вхідних даних,
            3 якщо класифікація не завершилась.
        """
        overrides = {
            name: options[name]
            for name in ("tol", "samples", "seed", "anchor", "max_degree")
            if options.get(name) is not None
        }
        try:
            spec = with_overrides(load_problem(options["spec"]), overrides)
            outcome, report = run_problem(spec, include_timing=options["timing"])
        except InputError as error:
            raise CommandError(str(error), returncode=error.code)

        text = render_report(report)
        if options.get("json_out"):
            Path(options["json_out"]).write_text(text, encoding="utf-8")
        else:
            self.stdout.write(text, ending="")

        if options.get("emit_diagram") and outcome.atlas is not None:
            target = Path(options["emit_diagram"])
            fmt = "dot" if target.suffix == ".dot" else "text"
            target.write_text(render_diagram(outcome.atlas, fmt), encoding="utf-8")

        if outcome.exit_code:
            messages = "; ".join(f"{e.stage}: {e}" for e in outcome.errors) or "classification incomplete"
            raise CommandError(messages, returncode=outcome.exit_code)
        self.stderr.write(f"{report.verdict}: {report.conclusion}")
