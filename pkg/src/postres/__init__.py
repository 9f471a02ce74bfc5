"""Post-resonance phase shifter models: reflector ladders, periodic lines,
coupled modes, reflective-type phase shifters and quantized phased arrays."""

__version__ = "0.1.0"
