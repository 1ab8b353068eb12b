"""
Command Registry - allow-list of the batch commands.

Only registered commands can be executed. Library errors are logged and
mapped to the process exit-code contract: 0 ok, 2 input, 3 numeric,
4 convergence.
"""

import sys
from typing import Any, Callable, Dict, Optional

from svine.core.errors import SVineError
from svine.core.logging_utils import get_logger

EXIT_OK = 0
EXIT_UNEXPECTED = 3


class CommandRegistry:
    """
    Registry that manages the allowed commands and turns their outcome into
    an exit status.
    """

    def __init__(self):
        """Initialize the command registry."""
        self._commands: Dict[str, Dict[str, Any]] = {}
        self.logger = get_logger("commands", "commands.log")

    def register(self, name: str, function: Callable[..., Optional[int]], description: str):
        """Register a command under its catalog name."""
        self._commands[name] = {
            "function": function,
            "description": description,
        }

    def is_registered(self, command_name: str) -> bool:
        """
        Check if a command is registered in the allow-list.

        Args:
            command_name: Name of the command to check

        Returns:
            True if the command is registered, False otherwise
        """
        return command_name in self._commands

    def get_command(self, command_name: str) -> Optional[Dict[str, Any]]:
        return self._commands.get(command_name)

    def execute(self, command_name: str, *args, **kwargs) -> int:
        """
        Execute a registered command.

        Args:
            command_name: Name of the command to execute
            *args: Positional arguments for the command
            **kwargs: Keyword arguments for the command

        Returns:
            Process exit status.

        Raises:
            ValueError: If command is not registered
        """
        if not self.is_registered(command_name):
            raise ValueError(
                f"Command '{command_name}' is not registered. "
                f"Only registered commands can be executed."
            )

        command_info = self._commands[command_name]

        self.logger.info("Executing command '%s' with args=%s kwargs=%s", command_name, args, kwargs)
        try:
            result = command_info["function"](*args, **kwargs)
        except SVineError as e:
            self.logger.error("Command '%s' failed (exit %d): %s", command_name, e.exit_code, e)
            print(f"❌ {command_name}: {e}", file=sys.stderr)
            return e.exit_code
        except Exception as e:
            self.logger.exception("Command '%s' execution failed: %s", command_name, e)
            print(f"❌ {command_name}: unexpected error: {e}", file=sys.stderr)
            return EXIT_UNEXPECTED
        self.logger.info("Command '%s' completed successfully", command_name)
        return EXIT_OK if result is None else int(result)

    def list_commands(self) -> Dict[str, str]:
        """
        Get a list of all registered commands with their descriptions.

        Returns:
            Dictionary mapping command names to descriptions
        """
        return {
            name: info["description"]
            for name, info in self._commands.items()
        }
