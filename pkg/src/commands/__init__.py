"""
Command-line commands, registered on the group built by create_cli
"""
from src.commands.measure_commands import compute, sweep, oracle_compare
from src.commands.verify_commands import verify, search_violation

COMMANDS = [compute, sweep, verify, search_violation, oracle_compare]

__all__ = ['COMMANDS', 'compute', 'sweep', 'verify', 'search_violation', 'oracle_compare']
