import abc


class StatusMonitor(abc.ABC):
    """
    Abstract class for benchmark progress reporting.

    Do not use directly.
    """

    def launch_status(self):
        """
        Announce a run before its first trial.

        Arguments:
            None

        Returns:
            None

        """
        ...

    @abc.abstractmethod
    def emit_status(self, completed: int, mismatches: int = 0):
        """
        Report progress after a trial.

        Arguments:
            completed (int): Trials finished so far
            mismatches (int: 0): Trials whose results disagreed

        Returns:
            None

        """
        ...
