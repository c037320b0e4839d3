import argparse

from django.core.management.base import BaseCommand, CommandError

from app import cli


class Command(BaseCommand):
    help = "Kasteleyn 3-matrix toolkit. Usage: manage.py kas3 [--json] [--threads N] <subcommand> [args]"

    def add_arguments(self, parser):
        parser.add_argument("--json", action="store_true", help="print the JSON payload instead of the summary")
        parser.add_argument("--threads", type=int, default=None, help="worker threads, overrides KAS3_THREADS")
        parser.add_argument("argv", nargs=argparse.REMAINDER, help="subcommand and its arguments")

    def handle(self, *args, **options):
        result = cli.run(options["argv"], threads=options["threads"], as_json=options["json"])
        self.stdout.write(result.render())
        if result.status:
            raise CommandError(result.payload["error"]["message"], returncode=result.status)
