"""Reading and writing match files, model files, configuration and reports."""
