import sys
from datetime import datetime

from .StatusMonitor import StatusMonitor


class OneLineStatusMonitor(StatusMonitor):
    """
    A status monitor that keeps itself constrained to a single line.

    Good for running in a CLI. Writes to stderr so that report output on
    stdout stays clean. During a run, prints:

        🤔 7 of 20 trials done, 0 mismatches (35%).

    While the run boots, prints:

        Starting benchmark with 20 trials total.

    When every trial has finished, prints:

        👌 20 of 20 trials done, 0 mismatches (100%) in 3.2s.

    """

    def __init__(self, total: int, stream=None) -> None:
        """
        Create a new OneLineStatusMonitor.

        Arguments:
            total (int): The number of trials the run will perform
            stream (file: None): Where to print; stderr when omitted

        Returns:
            None

        """
        self.total = total
        self.stream = stream if stream is not None else sys.stderr
        self.started_time = datetime.now()

    def emit_status(self, completed: int, mismatches: int = 0):
        """
        Print the current status over the previous one.

        Arguments:
            completed (int): Trials finished so far
            mismatches (int: 0): Trials whose results disagreed

        Returns:
            None

        """
        done = completed >= self.total
        emoji = "👌" if done else "🤔"
        pct = completed / self.total if self.total else 1.0
        line = f"{emoji} {completed} of {self.total} trials done, {mismatches} mismatches ({int(100*pct)}%)"
        if done:
            elapsed = (datetime.now() - self.started_time).total_seconds()
            line += f" in {elapsed:.1f}s."
        print(line + "         ", end="\n" if done else "\r", file=self.stream)

    def launch_status(self):
        """
        Print the status of a run that has not started yet.

        Arguments:
            None

        Returns:
            None

        """
        self.started_time = datetime.now()
        print(
            f"Starting benchmark with {self.total} trials total.         ",
            end="\r",
            file=self.stream,
        )
