"""Generated state machines. Do not edit by hand."""
import logging
from collections import defaultdict

logger = logging.getLogger(__name__)


def _div(a, b):
    if isinstance(a, int) and isinstance(b, int) and not isinstance(a, bool) and not isinstance(b, bool):
        return int(a / b)
    return a / b


class BaseThing:
    """Ports are wired by the configuration (see app.py)."""

    def __init__(self, name):
        self._name = name
        self._peers = defaultdict(list)
        self._state = None
        self.outbox = []

    @property
    def current_state(self):
        return self._state

    def connect(self, port, peer, peer_port):
        self._peers[port].append((peer, peer_port))

    def send(self, port, message, *args):
        self.outbox.append((port, message, args))
        logger.debug("%s: %s!%s%r", self._name, port, message, args)
        for peer, peer_port in self._peers[port]:
            handler = getattr(peer, f"receive_{peer_port}_{message}", None)
            if handler is not None:
                handler(*args)

    def start(self):
        pass


class Thermostat(BaseThing):
    # statechart Control
    IDLE = "Idle"
    HEATING = "Heating"

    def __init__(self, name="Thermostat"):
        super().__init__(name)
        self.setpoint = 20
        self.hysteresis = 1
        self.switches = 0

    def start(self):
        self._enter(self.IDLE)

    def _enter(self, state):
        self._state = state
        if state == self.IDLE:
            pass
        elif state == self.HEATING:
            self.switches = self.switches + 1
            self.send_heater_heat_on()

    def receive_sensor_reading(self, celsius):
        match self._state:
            case self.IDLE:
                if celsius < (self.setpoint - self.hysteresis):  # transition 0: Idle -> Heating
                    self._enter(self.HEATING)
                    return True
            case self.HEATING:
                if celsius > (self.setpoint + self.hysteresis):  # transition 1: Heating -> Idle
                    self.send_heater_heat_off()
                    self._enter(self.IDLE)
                    return True
        logger.debug("%s: %s?%s dropped in state %s", self._name, "sensor", "reading", self._state)
        return False

    def send_heater_heat_on(self):
        self.send("heater", "heat_on")

    def send_heater_heat_off(self):
        self.send("heater", "heat_off")


class Heater(BaseThing):
    # statechart Relay
    OFF = "Off"
    ON = "On"

    def __init__(self, name="Heater"):
        super().__init__(name)
        self.running = False

    def start(self):
        self._enter(self.OFF)

    def _enter(self, state):
        self._state = state
        if state == self.OFF:
            self.running = False
        elif state == self.ON:
            self.running = True

    def receive_control_heat_on(self):
        match self._state:
            case self.OFF:
                if True:  # transition 0: Off -> On
                    self._enter(self.ON)
                    return True
        logger.debug("%s: %s?%s dropped in state %s", self._name, "control", "heat_on", self._state)
        return False

    def receive_control_heat_off(self):
        match self._state:
            case self.ON:
                if True:  # transition 1: On -> Off
                    self._enter(self.OFF)
                    return True
        logger.debug("%s: %s?%s dropped in state %s", self._name, "control", "heat_off", self._state)
        return False

    def send_probe_reading(self, celsius):
        self.send("probe", "reading", celsius)
