import json

from django.core.management.base import BaseCommand

from factorization.report import report_schema


class Command(BaseCommand):
    help = "Prints the JSON schema of the classification report."

    def handle(self, *args, **options):
        self.stdout.write(json.dumps(report_schema(), indent=2, sort_keys=True))
