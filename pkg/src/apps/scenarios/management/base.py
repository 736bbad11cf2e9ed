import json
from contextlib import contextmanager

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError as SerializerError

from apps.arrangement.genome import GenomeLengthError
from apps.robot.kinematics import DimensionMismatch

from ..config import ConfigError, load_config, load_preset

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _message(exc):
    if isinstance(exc, SerializerError):
        return json.dumps(exc.detail)
    if isinstance(exc, ValidationError):
        if hasattr(exc, 'error_dict'):
            return '; '.join(f'{key}: {" ".join(msgs)}' for key, msgs in exc.message_dict.items())
        return ' '.join(exc.messages)
    return str(exc)


class ScenarioCommand(BaseCommand):
    """Shared scenario options and exit-code mapping for the tendon lab commands."""

    def add_scenario_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--config', help='Scenario JSON document.')
        source.add_argument('--preset', help='Name of a shipped scenario preset.')

    def load_scenario(self, options):
        with self.command_errors():
            if options.get('config'):
                return load_config(options['config'])
            return load_preset(options['preset'])

    @contextmanager
    def command_errors(self):
        """Map domain failures to exit code 2 and I/O or solver failures to 1."""
        try:
            yield
        except CommandError:
            raise
        except (ConfigError, ValidationError, SerializerError, DimensionMismatch, GenomeLengthError) as exc:
            raise CommandError(_message(exc), returncode=USAGE_ERROR) from exc
        except OSError as exc:
            where = f'{exc.filename}: ' if exc.filename else ''
            raise CommandError(f'{where}{exc.strerror or exc}', returncode=RUNTIME_ERROR) from exc
        except RuntimeError as exc:
            raise CommandError(str(exc), returncode=RUNTIME_ERROR) from exc

    def read_json(self, path, what):
        with self.command_errors():
            with open(path, encoding='utf-8') as handle:
                try:
                    return json.load(handle)
                except json.JSONDecodeError as exc:
                    raise CommandError(f'{path}:{exc.lineno}: invalid {what}: {exc.msg}', returncode=USAGE_ERROR)
