# Data storage package
from .result_writer import ResultWriter, read_table

__all__ = ['ResultWriter', 'read_table']
