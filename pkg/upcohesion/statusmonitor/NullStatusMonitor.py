from .StatusMonitor import StatusMonitor


class NullStatusMonitor(StatusMonitor):
    """
    A status monitor that reports nothing.

    The default for library calls and for `bench --json`.
    """

    def __init__(self, total: int = 0, **kwargs):
        return

    def launch_status(self):
        return

    def emit_status(self, completed: int, mismatches: int = 0):
        return
