"""Process-data analytics for test security: keystroke biometrics, copy-typing and AI-text detection."""
__version__ = "0.1.0"
