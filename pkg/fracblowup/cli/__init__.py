from fracblowup.cli.check_commands import check as check_command
from fracblowup.cli.solve_commands import solve as solve_command
from fracblowup.cli.solve_commands import sweep as sweep_command
from fracblowup.cli.solve_commands import residual as residual_command
from fracblowup.cli.solve_commands import analyze as analyze_command
from fracblowup.cli.replicate_commands import replicate as replicate_command
from fracblowup.cli.info_commands import info as info_command
