from django.core.management.base import BaseCommand, CommandError

from factorization.exceptions import FactorizationError
from factorization.problem import build_problem, load_problem
from factorization.surface import build_atlas, render_diagram


class Command(BaseCommand):
    help = "Prints the sheet diagram of the Riemann surface of G(k)."

    def add_arguments(self, parser):
        parser.add_argument("spec", help="TOML problem file")
        parser.add_argument("--format", choices=("text", "dot"), default="text")

    def handle(self, *args, **options):
        try:
            spec = load_problem(options["spec"])
            atlas = build_atlas(build_problem(spec), axis_tilt=spec.options.axis_tilt)
        except FactorizationError as error:
            raise CommandError(f"{error.stage}: {error}", returncode=error.code)
        self.stdout.write(render_diagram(atlas, options["format"]), ending="")
