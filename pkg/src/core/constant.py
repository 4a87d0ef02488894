# Messages

# SUCCESS
SUCCESS_RUN_FINISHED = "Запуск завершён."
SUCCESS_MANIFEST_WRITTEN = "Манифест записан."
SUCCESS_CALIBRATION_SAVED = "Калибровка сохранена."

# FAIL: входные данные
FAIL_ANGLE_RANGE = "Угол должен лежать в (0, pi]."
FAIL_NEGATIVE_ALPHA = "Амплитуда alpha должна быть неотрицательной."
FAIL_TIME_POSITIVE = "Время должно быть положительным."
FAIL_PLANAR_UNEQUAL = "Плоский режим требует вещественных alpha одинакового модуля."
FAIL_TWO_CORNERS = "Вектор V определён только для двух углов."
FAIL_M_RANGE = "Номер окна m должен лежать в 1..N."
FAIL_CORNER_LAYOUT = "Углы должны стоять в нечётных точках -2N+1, ..., 2N-1."
FAIL_GRID_X0 = "Сетка должна содержать точку x0."
FAIL_EPS_SMALL = "Ширина сглаживания должна быть не меньше 2h."
FAIL_EPS_LARGE = "Ширина сглаживания больше расстояния между углами."
FAIL_DT_UNSTABLE = "Шаг dt превышает границу устойчивости."
FAIL_BLOWUP = "Шаг отклонён: норма T ушла от единицы."
FAIL_TIMES_MISMATCH = "Времена полей не совпадают."
FAIL_GRID_OVERLAP = "Сетки полей не пересекаются."
FAIL_OUT_OF_RANGE_Y = "Точка вне траектории профиля, увеличьте Ymax."
FAIL_PROFILE_RANGE = "Ymax и dy должны быть положительными."
FAIL_EXCISION = "Радиус вырезания меньше шага сетки."
FAIL_WINDOW_M = "Номер окна m должен быть не меньше 1."
FAIL_SAMPLER_GRID = "Для аналитического сэмплера нужны L и шаг dx."
FAIL_XI_NO_INTERVALS = "Нет единичных интервалов частот вне окон."
FAIL_NO_CALIBRATION = "Нет калибровки для этого числа углов."
FAIL_CONFIG_KEY = "Неизвестный ключ конфигурации."
FAIL_CONFIG_LINE = "Строка конфигурации должна иметь вид key = value."

# FAIL: численные
FAIL_ADMISSIBLE_EMPTY = "Допустимый интервал времени пуст."
FAIL_SNAP_8PI = "Нет времени с 1/t в 8piZ внутри допустимого интервала."
FAIL_UNDERSAMPLED = "Сетка не разрешает осцилляции."
FAIL_PROFILE_REFINEMENT = "Шаг dy слишком грубый даже после измельчения."
FAIL_LIMIT_DIVERGENCE = "Осцилляции T(y) не затухают."
FAIL_STEP_UNDERFLOW = "Шаг по времени исчез около t = 0."
FAIL_IO = "Ошибка записи результатов."
