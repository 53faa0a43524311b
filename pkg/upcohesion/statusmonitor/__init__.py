from .StatusMonitor import StatusMonitor
from .NullStatusMonitor import NullStatusMonitor
from .OneLineStatusMonitor import OneLineStatusMonitor
