from quarterwave.configuration.base_options import BaseOptions
from quarterwave.configuration.configuration import Configuration
